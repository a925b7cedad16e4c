"""Mean-square-velocity series for the free and restricted path measures.

The common object is

    S(tau) = sum_j j^{-2} [sin(j pi (t0 + tau)) - sin(j pi t0)]^2 * w_j

with w_j = 1 for the unrestricted (Feynman) measure and
w_j = 1 - Z(W_j), W_j = (Abar / j^(alpha-1))^2, for the restricted one.
<v^2> at resolution eps is (2 hbar / m T) (T / pi eps)^2 S(eps / T).

Accuracy notes: a naive truncation of these series needs ~1e8 terms for
1e-9 absolute accuracy because the tail only decays like 1/N.  Instead
the partial sum is corrected and bounded analytically:

* the squared sine difference expands into a constant plus four cosine
  terms; the constant's exact tail is the trigamma function psi_1(N+1),
  while each oscillatory tail obeys the Abel/Dirichlet-kernel bound
  |sum_{j>N} cos(j theta)/j^2| <= 2 / ((N+1)^2 sin(theta/2)); where that
  bound is too weak (theta near 0) the tail is instead evaluated as a
  QUADPACK Fourier integral with a midpoint-rule error bound;
* in the restricted series the weights 1 - Z(W_j) <= min(1, 2 W_j / 3)
  make the tail integrable, giving a power-law integral bound.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Iterable, Optional

import numpy as np
import scipy.special as sc
from scipy.integrate import quad as _quad

from .paths import ModelParams, scale_relations
from .special import (
    ZETA2,
    ConvergenceError,
    SeriesValue,
    chunked_sum,
    li2_exp,
    one_minus_zed,
)

__all__ = [
    "RegimeReport",
    "s_feynman",
    "s_feynman_closed",
    "v2_feynman",
    "s_diff",
    "v2_diff",
    "regime_report",
    "uv_plateau_scale",
    "crossing_eps",
    "FractalRegimeError",
    "ScanRow",
    "scan_v2",
    "scan_rows_to_csv",
    "SERIES_CAP",
]

SERIES_CAP = 10_000_000


@dataclass(frozen=True)
class RegimeReport:
    """Two-regime characterization of the restricted <v^2>.

    v2_uv is the finite UV plateau (pi A / T) sqrt(hbar / m T); c_coeff
    the low-resolution correction coefficient C = (4/pi^3)(1/A)(hbar T/m)^{3/2};
    epsilon_D separates the regimes; p_uv = m sqrt(v2_uv).
    """

    v2_uv: float
    c_coeff: float
    epsilon_D: float
    p_uv: float


def _tolerance_met(value: float, tail: float, tol: float) -> bool:
    return tail <= tol * max(1.0, abs(value))


def _cosine_components(tau: float, t0_frac: float):
    """Decompose [sin(j pi (t0+tau)) - sin(j pi t0)]^2 / j^2 summed over j.

    Returns (c0, [(coef, theta_hat), ...]) such that the j-th term equals
    c0/j^2 + sum_i coef_i cos(j theta_i)/j^2, with theta_hat the distance
    of theta to the nearest multiple of 2 pi.  Components with equal
    theta_hat are merged so exact cancellations (e.g. t0 = 0) are kept.
    """
    raw = [
        (-0.5, 2.0 * math.pi * (t0_frac + tau)),
        (-0.5, 2.0 * math.pi * t0_frac),
        (-1.0, math.pi * tau),
        (1.0, math.pi * (2.0 * t0_frac + tau)),
    ]
    c0 = 1.0
    merged: dict[float, float] = {}
    for coef, theta in raw:
        theta_hat = abs(math.remainder(theta, 2.0 * math.pi))
        merged[theta_hat] = merged.get(theta_hat, 0.0) + coef
    components = []
    for theta_hat, coef in sorted(merged.items()):
        if coef == 0.0:
            continue
        if theta_hat == 0.0:
            c0 += coef
        else:
            components.append((coef, theta_hat))
    return c0, components


def _feynman_terms(tau: float, t0_frac: float, j: np.ndarray) -> np.ndarray:
    ds = np.sin(j * (math.pi * (t0_frac + tau))) - np.sin(j * (math.pi * t0_frac))
    return (ds / j) ** 2


def s_feynman(tau: float, t0_frac: float = 0.0, tol: float = 1e-10) -> SeriesValue:
    """Free-measure series sum_j j^{-2} [sin(j pi (t0+tau)) - sin(j pi t0)]^2.

    Equals (pi^2/2) tau (1 - tau) exactly and is independent of t0; both
    facts are left to tests — this routine only sums.  The partial sum is
    corrected by the exact trigamma tail of its smooth part, so tail_bound
    covers only the oscillatory remainder.
    """
    if not 0.0 <= tau < 1.0:
        raise ValueError("tau must lie in [0, 1)")
    if not 0.0 <= t0_frac < 1.0:
        raise ValueError("t0_frac must lie in [0, 1)")
    if tau == 0.0:
        return SeriesValue(0.0, 0, 0.0, True)

    c0, components = _cosine_components(tau, t0_frac)
    n = 1 << 14
    value = 0.0
    while True:
        j = np.arange(1, n + 1, dtype=float)
        partial = chunked_sum(_feynman_terms(tau, t0_frac, j))
        trigamma = float(sc.polygamma(1, n + 1))
        value = partial + c0 * trigamma
        tail = 0.0
        share = tol * max(1.0, abs(value)) / max(1, len(components))
        for coef, theta in components:
            cheap = min(2.0 / ((n + 1) ** 2 * math.sin(0.5 * theta)), trigamma)
            if cheap <= share:
                tail += abs(coef) * cheap
                continue
            # Evaluate the oscillatory tail itself: sum_{j>n} cos(j theta)/j^2
            # equals the Fourier integral from n+1/2 (midpoint rule) up to a
            # correction bounded through f'' of cos(theta t)/t^2.
            est, quad_err = _quad(
                lambda t: 1.0 / (t * t),
                n + 0.5,
                np.inf,
                weight="cos",
                wvar=theta,
                limit=200,
            )
            a = n - 0.5
            midpoint_err = (theta**2 / a + 2.0 * theta / a**2 + 2.0 / a**3) / 24.0
            value += coef * est
            tail += abs(coef) * (abs(quad_err) + midpoint_err)
        if _tolerance_met(value, tail, tol):
            return SeriesValue(value, n, tail, True)
        if n >= SERIES_CAP:
            return SeriesValue(value, n, tail, False)
        n *= 4


def s_feynman_closed(tau: float) -> float:
    """Dilogarithm closed form of the free series.

    S_F(tau) = zeta(2)/2 - Re Li2(e^{2 pi i tau}) / 2, which reduces to
    (pi^2/2) tau (1 - tau).
    """
    if not 0.0 < tau < 1.0:
        raise ValueError("tau must lie in (0, 1)")
    return 0.5 * ZETA2 - 0.5 * li2_exp(2j * math.pi * tau).real


def _weights_w(params: ModelParams, j: np.ndarray) -> np.ndarray:
    """W_j = (Abar / j^(alpha-1))^2 for the restricted weights 1 - Z(W_j)."""
    return (params.a_bar / j ** (params.alpha - 1.0)) ** 2


def _s_diff_direct(tau: float, params: ModelParams, tol: float) -> SeriesValue:
    abar = params.a_bar
    alpha = params.alpha
    j_turn = 1.0 / (math.pi * tau)  # sin^2(j pi tau) <= min(1, (j pi tau)^2)
    n = 1 << 12
    while True:
        j = np.arange(1, n + 1, dtype=float)
        terms = (np.sin(j * (math.pi * tau)) / j) ** 2 * one_minus_zed(_weights_w(params, j))
        value = chunked_sum(terms)
        # Tail: terms <= (2/3) Abar^2 * min(1, (pi tau j)^2) * j^{-2 alpha} ...
        # piecewise integral over j > n, split at j_turn.
        pref = (2.0 / 3.0) * abar * abar
        p_low = 2.0 * (alpha - 1.0)  # exponent while sin^2 ~ (j pi tau)^2
        p_high = 2.0 * alpha
        hi_start = max(float(n), j_turn)
        tail = pref * hi_start ** (1.0 - p_high) / (p_high - 1.0)
        if j_turn > n:
            if abs(p_low - 1.0) < 1e-9:
                seg = math.log(j_turn / n)
            else:
                seg = (j_turn ** (1.0 - p_low) - float(n) ** (1.0 - p_low)) / (1.0 - p_low)
            tail += pref * (math.pi * tau) ** 2 * seg
        # weights also obey 1 - Z <= 1, so the free-measure trigamma tail
        # is an alternative bound; keep the smaller.
        tail = min(tail, 4.0 * float(sc.polygamma(1, n + 1)))
        if _tolerance_met(value, tail, tol):
            return SeriesValue(value, n, tail, True)
        if n >= SERIES_CAP:
            return SeriesValue(value, n, tail, False)
        n *= 4


_Z_NEGLIGIBLE_W = 45.0  # Z(45) < 3e-19: modes this deep are effectively free


def _s_diff_via_feynman(tau: float, params: ModelParams, tol: float) -> SeriesValue:
    """S_D = S_F - sum_j j^{-2} sin^2(j pi tau) Z(W_j), for very large Abar.

    When Abar is huge the weights differ from 1 only beyond astronomically
    large j; summing the (tiny) Z-correction converges long before the
    weights do, so the free-series machinery carries the oscillatory part.
    """
    sf = s_feynman(tau, 0.0, 0.5 * tol)
    n = sf.n_terms
    j = np.arange(1, n + 1, dtype=float)
    w = _weights_w(params, j)
    zsum = chunked_sum((np.sin(j * (math.pi * tau)) / j) ** 2 * (1.0 - one_minus_zed(w)))
    # j_c: index below which W_j >= 45 so Z < 3e-19; above it bound Z by 1.
    j_c = (params.a_bar / math.sqrt(_Z_NEGLIGIBLE_W)) ** (1.0 / (params.alpha - 1.0))
    tail = 3e-19 / n + (1.0 / j_c if j_c > n else float(sc.polygamma(1, n + 1)))
    tail += sf.tail_bound
    value = sf.value - zsum
    return SeriesValue(value, n, tail, _tolerance_met(value, tail, tol) and sf.converged)


def s_diff(tau: float, params: ModelParams, tol: float = 1e-10) -> SeriesValue:
    """Restricted-measure series sum_j j^{-2} sin^2(j pi tau) (1 - Z(W_j)).

    t0 is fixed to 0 for the restricted measure (mean velocity at the
    origin); the t0-dependence is only exposed in s_feynman.
    """
    if not 0.0 <= tau < 1.0:
        raise ValueError("tau must lie in [0, 1)")
    if params.alpha <= 1:
        raise ValueError("s_diff requires alpha > 1")
    if tau == 0.0:
        return SeriesValue(0.0, 0, 0.0, True)
    # j* is where the weights saturate to ~1; beyond ~1e6 the direct route
    # cannot reach tight tolerances within the term cap.
    j_star = params.a_bar ** (1.0 / (params.alpha - 1.0))
    if j_star <= 1e6:
        return _s_diff_direct(tau, params, tol)
    return _s_diff_via_feynman(tau, params, tol)


def _v2_prefactor(eps: float, params: ModelParams) -> float:
    return (2.0 * params.hbar / (params.m * params.T)) * (params.T / (math.pi * eps)) ** 2


def _check_eps(eps: float, params: ModelParams) -> None:
    if not 0.0 < eps < params.T:
        raise ValueError("eps must lie in (0, T)")


def v2_feynman(eps: float, params: ModelParams, tol: float = 1e-9) -> float:
    """<v^2> at resolution eps for the free measure; ~ hbar/(m eps) to leading order."""
    _check_eps(eps, params)
    s = s_feynman(eps / params.T, 0.0, tol)
    if not s.converged:
        raise ConvergenceError("s_feynman did not converge")
    return _v2_prefactor(eps, params) * s.value


def v2_diff(eps: float, params: ModelParams, tol: float = 1e-9) -> float:
    """<v^2> at resolution eps for the restricted measure."""
    _check_eps(eps, params)
    s = s_diff(eps / params.T, params, tol)
    if not s.converged:
        raise ConvergenceError("s_diff did not converge")
    return _v2_prefactor(eps, params) * s.value


class FractalRegimeError(ValueError):
    """alpha <= 2: the restricted velocity is not bounded."""


def regime_report(params: ModelParams) -> RegimeReport:
    """UV plateau, low-resolution correction coefficient, and scales.

    Requires alpha > 2 (bounded velocity); the identity
    v2_uv * c_coeff = (4/pi^2)(hbar/m)^2 holds with A cancelling.
    """
    if params.alpha <= 2:
        raise FractalRegimeError("velocity is not bounded for alpha <= 2")
    a = params.amplitude
    v2_uv = (math.pi * a / params.T) * math.sqrt(params.hbar / (params.m * params.T))
    c_coeff = (4.0 / math.pi**3) / a * (params.hbar * params.T / params.m) ** 1.5
    return RegimeReport(
        v2_uv=v2_uv,
        c_coeff=c_coeff,
        epsilon_D=scale_relations(params).epsilon_D,
        p_uv=params.m * math.sqrt(v2_uv),
    )


def uv_plateau_scale(params: ModelParams) -> float:
    """(pi A / T) sqrt(hbar / m T) without the alpha > 2 gate.

    Useful as a comparison scale even when regime_report refuses (the
    plateau of the numerical series exists for any alpha > 1).
    """
    a = params.amplitude
    return (math.pi * a / params.T) * math.sqrt(params.hbar / (params.m * params.T))


def crossing_eps(params: ModelParams, lo: float = 1e-6, hi: Optional[float] = None) -> float:
    """eps where v2_diff falls to 50% of v2_feynman (regime boundary).

    The ratio v2_diff/v2_feynman is monotone in eps for practical
    parameters; bisection on log(eps).
    """
    hi = hi if hi is not None else 0.5 * params.T

    def ratio(eps: float) -> float:
        return v2_diff(eps, params, 1e-7) / v2_feynman(eps, params, 1e-7)

    r_lo, r_hi = ratio(lo), ratio(hi)
    if not (r_lo < 0.5 < r_hi):
        raise ValueError("crossing not bracketed by [lo, hi]")
    for _ in range(60):
        mid = math.sqrt(lo * hi)
        if ratio(mid) < 0.5:
            lo = mid
        else:
            hi = mid
        if hi / lo < 1.0 + 1e-6:
            break
    return math.sqrt(lo * hi)


@dataclass(frozen=True)
class ScanRow:
    eps: float
    v2: float
    n_terms: int
    tail_bound: float
    model: str
    converged: bool


def scan_v2(
    eps_grid: Iterable[float], params: ModelParams, model: str, tol: float = 1e-9
) -> list[ScanRow]:
    """Evaluate <v^2> over a grid for one model; rows keep truncation metadata."""
    if model not in ("feynman", "differentiable"):
        raise ValueError("model must be 'feynman' or 'differentiable'")
    rows = []
    for eps in eps_grid:
        _check_eps(eps, params)
        tau = eps / params.T
        s = s_feynman(tau, 0.0, tol) if model == "feynman" else s_diff(tau, params, tol)
        rows.append(
            ScanRow(
                eps=float(eps),
                v2=_v2_prefactor(eps, params) * s.value,
                n_terms=s.n_terms,
                tail_bound=s.tail_bound,
                model=model,
                converged=s.converged,
            )
        )
    return rows


def scan_rows_to_csv(rows: Iterable[ScanRow], fh: IO[str], metadata: Optional[dict] = None) -> None:
    if metadata:
        for key, val in metadata.items():
            fh.write(f"# {key} = {val}\n")
    writer = csv.writer(fh)
    writer.writerow(["eps", "v2", "n_terms", "tail_bound", "model"])
    for row in rows:
        writer.writerow(
            [
                repr(float(row.eps)),
                repr(float(row.v2)),
                int(row.n_terms),
                repr(float(row.tail_bound)),
                row.model,
            ]
        )
