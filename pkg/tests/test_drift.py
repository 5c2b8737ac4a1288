"""Drift coefficients, certificate search, and the random-scan lift.

The lift arithmetic is pinned against hand-computed constants for a
synthetic certificate, so the formulas are checked independently of the
search that normally produces their inputs.
"""

import math

import numpy as np
import pytest

from ergochain import (
    BadScanProbability,
    BadZ,
    COutOfRange,
    DriftCertificate,
    IndexOutOfRange,
    NoCertificate,
    admissible_c_interval,
    build_family,
    drift_coefficient,
    find_drift_certificate,
    lift_to_rgs,
    power_law,
    px_drift_coefficient,
    verify_drift,
)
from ergochain.drift import log_PxV, tail_surrogates

COEF_GEO_Z13_X10 = 0.960187767622529   # frozen direct evaluation
Z_UPPER_GEO = 1.4621171572600098       # 2 / (e^{-1} + 1)


def test_coefficient_tends_to_one_as_z_shrinks():
    base = drift_coefficient(0.12, 0.33, 1.0 + 1e-12)
    assert base == pytest.approx(1.0, abs=1e-11)


@pytest.mark.parametrize("z", [1.0, 0.5, -2.0, float("inf"), float("nan")])
def test_coefficient_rejects_bad_z(z):
    with pytest.raises(BadZ):
        drift_coefficient(0.1, 0.2, z)


def test_px_coefficient_geometric(fam):
    f = fam("geometric", 50)
    got = px_drift_coefficient(f, 1.3, 10)
    assert got == pytest.approx(COEF_GEO_Z13_X10, rel=1e-13)
    # same thing assembled by hand from the conditionals
    direct = f.p[9] * 0.3 + f.q[9] * (1.0 / 1.3 - 1.0) + 1.0
    assert got == pytest.approx(direct, rel=1e-14)
    with pytest.raises(IndexOutOfRange):
        px_drift_coefficient(f, 1.3, 1)
    with pytest.raises(IndexOutOfRange):
        px_drift_coefficient(f, 1.3, 51)


def test_balanced_walk_never_contracts():
    # p = q makes the coefficient 1 + p (z + 1/z - 2) > 1 for any z > 1
    for z in (1.05, 1.3, 1.8):
        assert drift_coefficient(0.3, 0.3, z) > 1.0


def test_tail_surrogates_geometric(fam):
    r_hat, q_hat = tail_surrogates(fam("geometric", 200))
    assert r_hat == pytest.approx(math.exp(-1.0), rel=1e-12)
    assert q_hat == pytest.approx(0.33065155633076704, rel=1e-12)


def test_log_PxV_matches_direct_expectation(fam):
    f = fam("geometric", 30)
    z = 1.1
    got = np.exp(log_PxV(f, math.log(z)))
    x = np.arange(1, 31)
    direct = (f.p * z ** (x + 1) + f.q * z ** (x - 1)
              + (1.0 - f.p - f.q) * z ** x)
    assert np.allclose(got, direct, rtol=1e-12)


def test_certificate_found_for_geometric(fam):
    f = fam("geometric", 200)
    cert = find_drift_certificate(f)
    assert isinstance(cert, DriftCertificate)
    assert cert.rho < 1.0
    assert 1.0 < cert.z < Z_UPPER_GEO
    assert cert.r_hat == pytest.approx(math.exp(-1.0), rel=1e-12)
    rep = verify_drift(cert, f)
    assert rep.holds
    assert rep.checked == 200
    assert rep.max_violation <= 1e-10


def test_tampered_certificate_fails(fam):
    import dataclasses
    f = fam("geometric", 100)
    cert = find_drift_certificate(f)
    bad = dataclasses.replace(cert, rho=cert.rho / 2.0)
    rep = verify_drift(bad, f)
    assert not rep.holds
    assert rep.max_violation > 0.0


def test_no_certificate_for_heavy_tail():
    f = build_family(power_law(2.0), 10_000)
    out = find_drift_certificate(f)
    assert isinstance(out, NoCertificate)
    assert out.r_hat >= 0.999


def test_no_certificate_when_grid_excluded(fam):
    f = fam("geometric", 100)
    out = find_drift_certificate(f, z_grid=[1.8, 2.5])
    assert isinstance(out, NoCertificate)


# -- random-scan lift --------------------------------------------------------


def _synthetic_cert():
    return DriftCertificate(z=1.3, rho=0.9602, log_L=0.0, x0=1,
                            r_hat=0.5, q_hat=0.3, N=100)


def test_admissible_interval_frozen_constants():
    lo, hi = admissible_c_interval(_synthetic_cert(), 0.5)
    assert lo == pytest.approx(1.0, abs=0)
    assert hi == pytest.approx(1.0414496979795875, rel=1e-13)


def test_lift_frozen_constants():
    lifted = lift_to_rgs(_synthetic_cert(), 0.5)
    assert lifted.c == pytest.approx(1.0205144281094645, rel=1e-13)
    assert lifted.gamma == pytest.approx(0.9899489769353541, rel=1e-13)
    assert lifted.base.rho < lifted.gamma < 1.0


@pytest.mark.parametrize("c", [1.0, 1.0414496979795875, 0.5, 2.0])
def test_lift_rejects_inadmissible_c(c):
    with pytest.raises(COutOfRange):
        lift_to_rgs(_synthetic_cert(), 0.5, c=c)


def test_lift_degrades_as_scan_concentrates():
    cert = _synthetic_cert()
    g = [lift_to_rgs(cert, p).gamma for p in (0.5, 0.7, 0.9)]
    assert g[0] < g[1] < g[2] < 1.0


@pytest.mark.parametrize("p", [0.0, 1.0, -0.5])
def test_interval_rejects_degenerate_scan(p):
    with pytest.raises(BadScanProbability):
        admissible_c_interval(_synthetic_cert(), p)


def test_lifted_certificate_verifies_on_support(fam):
    f = fam("geometric", 100)
    cert = find_drift_certificate(f)
    lifted = lift_to_rgs(cert, 0.5)
    rep = verify_drift(lifted, f)
    assert rep.holds
    assert rep.checked == 2 * 100 - 1
    assert lifted.gamma > cert.rho


def test_certificate_json_fields(fam):
    cert = find_drift_certificate(fam("geometric", 100))
    d = cert.to_json_dict()
    assert {"z", "rho", "L", "x0", "r_hat", "q_hat"} <= set(d)
    lifted = lift_to_rgs(cert, 0.25)
    d2 = lifted.to_json_dict()
    assert d2["rgs"]["scan_p"] == 0.25
    assert {"c", "gamma", "bound_constant"} <= set(d2["rgs"])
