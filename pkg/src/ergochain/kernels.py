"""Transition kernels of the three chains and their spectral summaries.

For a truncated family on {1..N} the package builds three Markov kernels:

  marginal_x  the x-marginal birth-death chain, tridiagonal on {1..N}
  dgs         the deterministic-scan Gibbs chain (x then y), supported on
              the 2N-1 staircase states, not pi-symmetric
  rgs         the random-scan Gibbs chain that updates x with probability
              scan_p and y otherwise; pi-symmetric with positive self-loops

Product-space states are ordered (1,1), (2,1), (2,2), (3,2), ..., (N,N),
which keeps both product kernels banded. Total variation curves iterate a
distribution vector through the kernel; the n-step matrix is never formed.
Spectral summaries use the similarity transform D^{1/2} P D^{-1/2} with
D = diag(pi), which is symmetric exactly when P is pi-symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.linalg import eigh_tridiagonal

from .errors import (
    BadScanProbability,
    ErgochainError,
    IndexOutOfRange,
    NotSymmetricKernel,
    StartNotInSupport,
)
from .family import BivariateFamily

MARGINAL_X = "marginal_x"
DGS = "dgs"
RGS = "rgs"

# TV values below this are fitting noise and are excluded from rate fits.
_TV_FLOOR = 1e-13


@dataclass(frozen=True)
class TransitionMatrix:
    """A kernel, its state list, and its stationary distribution."""

    kind: str
    states: list
    P: sp.csr_matrix = field(repr=False)
    stationary: np.ndarray = field(repr=False)
    N: int
    scan_p: float | None = None

    @property
    def n_states(self) -> int:
        return len(self.states)

    def index_of(self, state) -> int:
        """Position of a state; StartNotInSupport when absent."""
        if self.kind == MARGINAL_X:
            try:
                x = int(state)
            except (TypeError, ValueError):
                raise StartNotInSupport(f"state {state!r} not in chain support") from None
            if not 1 <= x <= self.N:
                raise StartNotInSupport(f"state {state!r} not in chain support")
            return x - 1
        try:
            x, y = state
        except (TypeError, ValueError):
            raise StartNotInSupport(f"state {state!r} not in chain support") from None
        x, y = int(x), int(y)
        if 1 <= y <= self.N and x == y:
            return 2 * y - 2
        if 1 <= y < self.N and x == y + 1:
            return 2 * y - 1
        raise StartNotInSupport(f"state {state!r} not in chain support")


def _staircase_states(N: int) -> list[tuple[int, int]]:
    out = [(1, 1)]
    for y in range(1, N):
        out.append((y + 1, y))
        out.append((y + 1, y + 1))
    return out


def build_Px(fam: BivariateFamily) -> TransitionMatrix:
    """Tridiagonal kernel of the x-marginal birth-death chain."""
    N = fam.N
    p, q = fam.p, fam.q
    stay = np.maximum(0.0, 1.0 - p - q)
    rows, cols, data = [], [], []
    for x in range(1, N + 1):
        i = x - 1
        if x > 1 and q[i] > 0:
            rows.append(i); cols.append(i - 1); data.append(q[i])
        rows.append(i); cols.append(i); data.append(stay[i])
        if x < N and p[i] > 0:
            rows.append(i); cols.append(i + 1); data.append(p[i])
    P = sp.csr_matrix((data, (rows, cols)), shape=(N, N))
    return TransitionMatrix(kind=MARGINAL_X, states=list(range(1, N + 1)),
                            P=P, stationary=fam.pi_x, N=N)


def build_Pdgs(fam: BivariateFamily) -> TransitionMatrix:
    """Deterministic-scan kernel: draw x' given y, then y' given x'.

    Each row has at most four nonzero entries and depends on the current
    state only through y.
    """
    N = fam.N
    beta = fam.beta                      # P(X = y+1 | Y = y)
    ob = np.exp(fam.log_a - fam.log_piy)  # P(X = y | Y = y)
    delta = fam.delta                    # P(Y = x-1 | X = x)
    od = np.exp(fam.log_a - fam.log_pix)  # P(Y = x | X = x)
    states = _staircase_states(N)
    rows, cols, data = [], [], []
    for i, (_, y) in enumerate(states):
        j = y - 1
        # x' = y, then y' in {y-1, y}
        if y > 1:
            _put(rows, cols, data, i, 2 * (y - 1) - 1, ob[j] * delta[j])
        _put(rows, cols, data, i, 2 * y - 2, ob[j] * od[j])
        # x' = y + 1 (impossible at y = N), then y' in {y, y+1}
        if y < N:
            _put(rows, cols, data, i, 2 * y - 1, beta[j] * delta[j + 1])
            _put(rows, cols, data, i, 2 * y, beta[j] * od[j + 1])
    P = sp.csr_matrix((data, (rows, cols)), shape=(2 * N - 1, 2 * N - 1))
    return TransitionMatrix(kind=DGS, states=states, P=P,
                            stationary=fam.support_probs(), N=N)


def build_Prgs(fam: BivariateFamily, scan_p: float) -> TransitionMatrix:
    """Random-scan kernel: refresh x with probability scan_p, else y."""
    if not (isinstance(scan_p, (int, float)) and 0.0 < scan_p < 1.0):
        raise BadScanProbability(f"scan probability {scan_p!r} not in (0, 1)")
    scan_p = float(scan_p)
    N = fam.N
    beta = fam.beta
    ob = np.exp(fam.log_a - fam.log_piy)
    delta = fam.delta
    od = np.exp(fam.log_a - fam.log_pix)
    states = _staircase_states(N)
    rows, cols, data = [], [], []
    for i, (x, y) in enumerate(states):
        acc: dict[int, float] = {}
        j, k = y - 1, x - 1
        # x-update: (x', y) with x' in {y, y+1}
        acc[2 * y - 2] = acc.get(2 * y - 2, 0.0) + scan_p * ob[j]
        if y < N:
            acc[2 * y - 1] = acc.get(2 * y - 1, 0.0) + scan_p * beta[j]
        # y-update: (x, y') with y' in {x-1, x}
        if x > 1:
            acc[2 * (x - 1) - 1] = acc.get(2 * (x - 1) - 1, 0.0) + (1 - scan_p) * delta[k]
        acc[2 * x - 2] = acc.get(2 * x - 2, 0.0) + (1 - scan_p) * od[k]
        for col in sorted(acc):
            _put(rows, cols, data, i, col, acc[col])
    P = sp.csr_matrix((data, (rows, cols)), shape=(2 * N - 1, 2 * N - 1))
    return TransitionMatrix(kind=RGS, states=states, P=P,
                            stationary=fam.support_probs(), N=N, scan_p=scan_p)


def _put(rows, cols, data, i, j, v):
    if v > 0.0:
        rows.append(i); cols.append(j); data.append(v)


# -- total variation curves ------------------------------------------------


@dataclass(frozen=True)
class TVCurve:
    """Total variation distances to stationarity along the chain.

    values[n] is TV after n steps from the point mass at start, for
    n = 0..n_max, with the 1/2 L1 convention. fitted_rate and
    fitted_constant come from a least-squares line through log TV over
    fit_window, the trailing half of the steps with TV above 1e-13;
    they are None when fewer than five such steps exist.
    """

    kind: str
    start: object
    n_max: int
    values: np.ndarray = field(repr=False)
    fitted_rate: float | None
    fitted_constant: float | None
    fit_window: tuple[int, int] | None

    def to_csv(self) -> str:
        lines = ["n,tv"]
        lines += [f"{n},{float(v)!r}" for n, v in enumerate(self.values)]
        return "\n".join(lines) + "\n"

    def to_json_dict(self) -> dict:
        return {
            "rate": self.fitted_rate,
            "constant": self.fitted_constant,
            "gap": None if self.fitted_rate is None else 1.0 - self.fitted_rate,
            "N": int(len(self.values) - 1),
        }


def tv_curve(tm: TransitionMatrix, start, n_max: int) -> TVCurve:
    """TV to stationarity for n = 0..n_max by iterated vector transport."""
    if n_max < 0:
        raise IndexOutOfRange("n_max must be nonnegative")
    i0 = tm.index_of(start)
    PT = tm.P.T.tocsr()
    pi = tm.stationary
    v = np.zeros(tm.n_states)
    v[i0] = 1.0
    values = np.empty(n_max + 1)
    values[0] = 0.5 * np.abs(v - pi).sum()
    for n in range(1, n_max + 1):
        v = PT @ v
        values[n] = 0.5 * np.abs(v - pi).sum()
    rate, const, window = _fit_rate(values)
    return TVCurve(kind=tm.kind, start=start, n_max=n_max, values=values,
                   fitted_rate=rate, fitted_constant=const, fit_window=window)


def _fit_rate(values: np.ndarray):
    usable = np.where(values > _TV_FLOOR)[0]
    usable = usable[usable >= 1]
    half = usable[len(usable) // 2:]
    if len(half) < 5:
        return None, None, None
    slope, intercept = np.polyfit(half, np.log(values[half]), 1)
    rate = min(float(np.exp(slope)), 1.0)
    return rate, float(np.exp(intercept)), (int(half[0]), int(half[-1]))


# -- spectral summaries ------------------------------------------------------


@dataclass(frozen=True)
class SpectralGap:
    """Second-largest eigenvalue modulus of a pi-symmetric kernel."""

    kind: str
    N: int
    norm_estimate: float
    gap: float
    method: str

    def to_json_dict(self) -> dict:
        return {"rate": self.norm_estimate, "constant": None,
                "gap": self.gap, "N": self.N}


def spectral_gap(tm: TransitionMatrix) -> SpectralGap:
    """Spectral summary via the symmetrization D^{1/2} P D^{-1/2}.

    The marginal chain is tridiagonal and solved exactly; the random-scan
    chain is handled by power iteration on the squared operator after
    deflating the known top eigenvector sqrt(pi). The deterministic-scan
    chain is not pi-symmetric and is rejected.
    """
    if tm.kind == MARGINAL_X:
        d0 = tm.P.diagonal()
        sup = tm.P.diagonal(1)
        sub = tm.P.diagonal(-1)
        off = np.sqrt(sup * sub)
        w = eigh_tridiagonal(d0, off, eigvals_only=True)
        order = np.argsort(-np.abs(w))
        top, second = abs(w[order[0]]), abs(w[order[1]])
        if abs(top - 1.0) > 1e-8:
            raise ErgochainError(f"top eigenvalue {top!r} is not 1")
        norm = min(max(second, 0.0), 1.0)
        return SpectralGap(kind=tm.kind, N=tm.N, norm_estimate=norm,
                           gap=1.0 - norm, method="tridiagonal")
    if tm.kind == RGS:
        norm = _second_modulus_power(tm)
        return SpectralGap(kind=tm.kind, N=tm.N, norm_estimate=norm,
                           gap=1.0 - norm, method="power_deflation")
    raise NotSymmetricKernel(f"spectral gap undefined for kind {tm.kind!r}")


def _second_modulus_power(tm: TransitionMatrix, tol: float = 1e-13,
                          max_iter: int = 200000) -> float:
    """|lambda_2| by power iteration with the top eigenvector deflated.

    Works on the squared symmetrized operator so sign-degenerate pairs
    cannot stall convergence. The starting vector is a fixed pseudo-random
    vector, keeping results reproducible byte for byte.
    """
    sqrt_pi = np.sqrt(tm.stationary)
    D = sp.diags(sqrt_pi)
    Dinv = sp.diags(1.0 / sqrt_pi)
    S = (D @ tm.P @ Dinv).tocsr()
    v1 = sqrt_pi / np.linalg.norm(sqrt_pi)

    rng = np.random.Generator(np.random.Philox(20230915))
    x = rng.random(tm.n_states) - 0.5
    x -= v1 * (v1 @ x)
    nx = np.linalg.norm(x)
    if nx == 0.0:
        return 0.0
    x /= nx
    prev = math.inf
    est = 0.0
    for _ in range(max_iter):
        y = S @ x
        y -= v1 * (v1 @ y)
        est = float(np.linalg.norm(y))       # sqrt of Rayleigh quotient of S^2
        y = S @ y
        y -= v1 * (v1 @ y)
        n2 = np.linalg.norm(y)
        if n2 == 0.0:
            est = 0.0
            break
        x = y / n2
        if abs(est - prev) <= tol * max(est, 1e-12):
            break
        prev = est
    return min(max(est, 0.0), 1.0)


__all__ = [
    "MARGINAL_X", "DGS", "RGS",
    "TransitionMatrix", "TVCurve", "SpectralGap",
    "build_Px", "build_Pdgs", "build_Prgs", "tv_curve", "spectral_gap",
]
