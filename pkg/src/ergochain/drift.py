"""Geometric drift certificates for the marginal and random-scan chains.

The test function is V(x) = z^x with z > 1. One step of the birth-death
marginal multiplies V by

    coefficient(x, z) = p_x (z - 1) + q_x (1/z - 1) + 1,

so a certificate consists of a base z, a rate rho < 1 dominating the
coefficient for all x beyond a threshold x0, and the constant
L = max_{x <= x0} E[V(X_1) | X_0 = x], giving

    E[V(X_1) | X_0 = x] <= rho V(x) + L        for every x.

z must stay below 2 / (r + 1) where r bounds p_x / q_x in the tail; the
rate used is rho = 1 + (q/2)(z - 1)((r + 1)/2 - 1/z) with q a tail lower
bound on q_x. Tail surrogates r_hat and q_hat are max and min over the
upper half of {2..N}, excluding the last two indices where truncation
distorts p. When r_hat is 0.99 or larger the tail evidence cannot
separate the family from the critical case and no certificate is issued.

A certificate for the random-scan chain with scan probability s follows
by lifting: for any c strictly between s/(1-s) and s/(rho (1-s)),

    W(x, y) = V(x) + c G(y),   G(y) = ((a_y + z b_y) / (a_y + b_y)) z^y,
    gamma   = max{(1-s)(c rho + 1), s (1 + c) / c}  <  1,

and one random-scan step satisfies E W <= gamma W + (1-s) c L. All
verification is exhaustive over the truncated support and carried out in
log space, so certificates remain checkable when z^x overflows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import BadScanProbability, BadZ, COutOfRange, IndexOutOfRange
from .family import BivariateFamily, _encode_extended

# Tail ratio estimates at or above this are treated as critical.
R_BORDERLINE = 0.99


def drift_coefficient(p: float, q: float, z: float) -> float:
    """One-step multiplier of V(x) = z^x at up/down probabilities (p, q)."""
    if not (z > 1.0 and math.isfinite(z)):
        raise BadZ(f"z = {z!r} must be finite and exceed 1")
    return p * (z - 1.0) + q * (1.0 / z - 1.0) + 1.0


def px_drift_coefficient(fam: BivariateFamily, z: float, x: int) -> float:
    """coefficient(x, z) for the family's marginal chain, x >= 2."""
    if not 2 <= x <= fam.N:
        raise IndexOutOfRange(f"coefficient defined for 2 <= x <= N, got {x}")
    return drift_coefficient(fam.p[x - 1], fam.q[x - 1], z)


def tail_surrogates(fam: BivariateFamily) -> tuple[float, float]:
    """(r_hat, q_hat): max p_x/q_x and min q_x over the upper half of
    {2..N} with the truncation-distorted indices N-1 and N excluded."""
    lo = max(2, fam.N // 2)
    hi = fam.N - 2
    if hi < lo:
        raise IndexOutOfRange(f"N = {fam.N} leaves no tail window")
    sl = slice(lo - 1, hi)
    r_hat = float(np.max(fam.p[sl] / fam.q[sl]))
    q_hat = float(np.min(fam.q[sl]))
    return r_hat, q_hat


def log_PxV(fam: BivariateFamily, log_z: float) -> np.ndarray:
    """log E[z^{X_1} | X_0 = x] for x = 1..N, computed in log space."""
    x = np.arange(1, fam.N + 1, dtype=float)
    stay = np.maximum(0.0, 1.0 - fam.p - fam.q)
    with np.errstate(divide="ignore"):
        lp = np.log(fam.p) + (x + 1) * log_z
        lq = np.log(fam.q) + (x - 1) * log_z
        ls = np.log(stay) + x * log_z
    out = np.logaddexp(np.logaddexp(lp, lq), ls)
    return out


@dataclass(frozen=True)
class DriftCertificate:
    """Verified geometric drift data for the marginal chain."""

    z: float
    rho: float
    log_L: float
    x0: int
    r_hat: float
    q_hat: float
    N: int

    @property
    def L(self) -> float:
        return math.exp(self.log_L)

    def to_json_dict(self) -> dict:
        return {
            "z": self.z,
            "rho": self.rho,
            "L": _encode_extended(self.L),
            "x0": self.x0,
            "r_hat": self.r_hat,
            "q_hat": self.q_hat,
        }


@dataclass(frozen=True)
class NoCertificate:
    """Outcome value when no drift certificate can be issued."""

    reason: str
    r_hat: float | None = None
    q_hat: float | None = None


@dataclass(frozen=True)
class RgsDriftCertificate:
    """Certificate lifted to the random-scan chain at scan probability scan_p."""

    base: DriftCertificate
    scan_p: float
    c: float
    gamma: float

    @property
    def log_bound_constant(self) -> float:
        """log of the additive constant (1 - scan_p) c L."""
        return math.log((1.0 - self.scan_p) * self.c) + self.base.log_L

    def to_json_dict(self) -> dict:
        out = self.base.to_json_dict()
        out["rgs"] = {
            "scan_p": self.scan_p,
            "c": self.c,
            "gamma": self.gamma,
            "bound_constant": _encode_extended(math.exp(self.log_bound_constant)),
        }
        return out


def rho_bound(r_hat: float, q_hat: float, z: float) -> float:
    """The certified rate at base z for tail surrogates (r_hat, q_hat)."""
    return 1.0 + 0.5 * q_hat * (z - 1.0) * (0.5 * (r_hat + 1.0) - 1.0 / z)


def find_drift_certificate(fam: BivariateFamily, z_grid=None,
                           grid_size: int = 64):
    """Search a z grid for the smallest certified rate.

    Returns a DriftCertificate or a NoCertificate value. The default grid
    is geometric with grid_size points strictly inside (1, 2/(r_hat+1)).
    Ties in rho resolve to the smaller z. The threshold x0 is the largest
    index whose coefficient exceeds rho (at least 1), so the drift bound
    holds pointwise beyond it by construction.
    """
    r_hat, q_hat = tail_surrogates(fam)
    if r_hat >= R_BORDERLINE:
        return NoCertificate(
            reason=f"tail ratio estimate {r_hat:.6g} is not below {R_BORDERLINE}",
            r_hat=r_hat, q_hat=q_hat)
    if not q_hat > 0.0:
        return NoCertificate(reason="tail down-probability estimate is zero",
                             r_hat=r_hat, q_hat=q_hat)
    z_max = 2.0 / (r_hat + 1.0)
    if z_grid is None:
        inset = (z_max - 1.0) * 1e-4
        z_grid = np.geomspace(1.0 + inset, z_max - inset, grid_size)
    else:
        z_grid = np.asarray(z_grid, dtype=float)
        z_grid = z_grid[(z_grid > 1.0) & (z_grid < z_max)]
    if z_grid.size == 0:
        return NoCertificate(reason="no admissible z in the grid",
                             r_hat=r_hat, q_hat=q_hat)

    rhos = np.array([rho_bound(r_hat, q_hat, z) for z in z_grid])
    k = int(np.argmin(rhos))
    z, rho = float(z_grid[k]), float(rhos[k])
    if not rho < 1.0:
        return NoCertificate(reason="no z with certified rate below one",
                             r_hat=r_hat, q_hat=q_hat)

    log_z = math.log(z)
    coeff = fam.p * (z - 1.0) + fam.q * (1.0 / z - 1.0) + 1.0
    violators = np.where(coeff[1:] > rho)[0]        # indices for x = 2..N
    x0 = int(violators[-1] + 2) if violators.size else 1
    log_L = float(np.max(log_PxV(fam, log_z)[:x0]))
    return DriftCertificate(z=z, rho=rho, log_L=log_L, x0=x0,
                            r_hat=r_hat, q_hat=q_hat, N=fam.N)


def admissible_c_interval(cert: DriftCertificate, scan_p: float) -> tuple[float, float]:
    """Open interval of lift constants c for the given scan probability."""
    if not 0.0 < scan_p < 1.0:
        raise BadScanProbability(f"scan probability {scan_p!r} not in (0, 1)")
    lo = scan_p / (1.0 - scan_p)
    hi = scan_p / (cert.rho * (1.0 - scan_p))
    return lo, hi


def lift_to_rgs(cert: DriftCertificate, scan_p: float,
                c: float | None = None) -> RgsDriftCertificate:
    """Lift a marginal-chain certificate to the random-scan chain.

    When c is omitted the geometric mean of the admissible interval is
    used; a supplied c outside the open interval raises COutOfRange.
    """
    lo, hi = admissible_c_interval(cert, scan_p)
    if c is None:
        c = math.sqrt(lo * hi)
    c = float(c)
    if not lo < c < hi:
        raise COutOfRange(f"c = {c!r} outside admissible interval ({lo!r}, {hi!r})")
    gamma = max((1.0 - scan_p) * (c * cert.rho + 1.0),
                scan_p * (1.0 + c) / c)
    if not (cert.rho < gamma < 1.0):
        raise COutOfRange(f"lift produced gamma = {gamma!r} outside (rho, 1)")
    return RgsDriftCertificate(base=cert, scan_p=scan_p, c=c, gamma=gamma)


@dataclass(frozen=True)
class DriftReport:
    """Exhaustive verification outcome over the truncated support.

    max_violation is the largest log excess of the one-step expectation
    over the certified bound; the certificate holds when it is at most
    zero up to 1e-10.
    """

    max_violation: float
    holds: bool
    worst_state: object
    checked: int


def _log_G(fam: BivariateFamily, log_z: float) -> np.ndarray:
    """log G(y) for y = 1..N with G(y) = ((a_y + z b_y)/(a_y + b_y)) z^y."""
    y = np.arange(1, fam.N + 1, dtype=float)
    return (np.logaddexp(fam.log_a, log_z + fam.log_b)
            - fam.log_piy + y * log_z)


def verify_drift(cert, fam: BivariateFamily) -> DriftReport:
    """Check a certificate's drift inequality at every support state.

    Accepts a DriftCertificate (marginal chain, states x = 1..N) or an
    RgsDriftCertificate (all 2N-1 staircase pairs). Both sides of the
    inequality are evaluated in log space.
    """
    if isinstance(cert, RgsDriftCertificate):
        return _verify_rgs(cert, fam)
    log_z = math.log(cert.z)
    lhs = log_PxV(fam, log_z)
    x = np.arange(1, fam.N + 1, dtype=float)
    rhs = np.logaddexp(math.log(cert.rho) + x * log_z, cert.log_L)
    viol = lhs - rhs
    k = int(np.argmax(viol))
    mv = float(viol[k])
    return DriftReport(max_violation=mv, holds=mv <= 1e-10,
                       worst_state=k + 1, checked=fam.N)


def _verify_rgs(cert: RgsDriftCertificate, fam: BivariateFamily) -> DriftReport:
    base = cert.base
    s, c = cert.scan_p, cert.c
    log_z = math.log(base.z)
    log_c = math.log(c)
    lG = _log_G(fam, log_z)
    lPxV = log_PxV(fam, log_z)

    states = fam.support_states()
    xs = np.array([st[0] for st in states], dtype=float)
    ys = np.array([st[1] for st in states], dtype=int)
    lV = xs * log_z
    lG_y = lG[ys - 1]
    lPxV_x = lPxV[np.asarray(xs, dtype=int) - 1]

    lhs = np.logaddexp(
        math.log(s) + math.log1p(c) + lG_y,
        np.logaddexp(math.log(1.0 - s) + lV,
                     math.log(1.0 - s) + log_c + lPxV_x),
    )
    lW = np.logaddexp(lV, log_c + lG_y)
    rhs = np.logaddexp(math.log(cert.gamma) + lW, cert.log_bound_constant)
    viol = lhs - rhs
    k = int(np.argmax(viol))
    mv = float(viol[k])
    return DriftReport(max_violation=mv, holds=mv <= 1e-10,
                       worst_state=states[k], checked=len(states))


__all__ = [
    "R_BORDERLINE",
    "DriftCertificate", "NoCertificate", "RgsDriftCertificate", "DriftReport",
    "drift_coefficient", "px_drift_coefficient", "tail_surrogates",
    "rho_bound", "find_drift_certificate", "admissible_c_interval",
    "lift_to_rgs", "verify_drift", "log_PxV",
]
