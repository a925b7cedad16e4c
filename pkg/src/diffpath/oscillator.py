"""Harmonic-oscillator modification factor Pi(T), energy shifts, unitarity.

The restricted fluctuation integral divides out the unrestricted one,
leaving the infinite product

    Pi(T) = prod_n Erf(c_n sqrt(lambda_n + omega^2)) / Erf(c_n sqrt(lambda_n)),

lambda_n = (n pi / T)^2 and c_n = B / n^alpha.  Everything is computed in
log space (a direct product of 1e5 factors each ~1 denormalizes), with a
rigorous tail bound for the truncated product.  The uniform level shift
is Delta omega = ln Pi(T) / T (Euclidean), so
E^D_n = hbar omega (n + 1/2) - hbar Delta omega with unchanged spacing.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Iterable, Optional

import numpy as np

from .paths import ModelParams
from .special import SeriesValue, chunked_sum, log_erf

__all__ = [
    "PiResult",
    "SpectrumShift",
    "PartitionFunctions",
    "UnitarityReport",
    "normalization_ratio",
    "log_pi",
    "spectrum_shift",
    "partition_functions",
    "unitarity_diagnostic",
    "scan_E0_vs_omega",
    "shift_rows_to_csv",
]

_ADAPTIVE_CAP = 1 << 24


@dataclass(frozen=True)
class PiResult:
    log_pi: float
    T: float
    n_terms: int
    tail_bound: float
    converged: bool
    params_snapshot: ModelParams


@dataclass(frozen=True)
class SpectrumShift:
    T: float
    delta_omega: float  # ln Pi(T) / T
    n_level: int
    energy: float  # E^D_n = hbar omega (n + 1/2) - hbar delta_omega
    e0: float  # ground state
    spacing: float  # hbar omega, unchanged by the shift


@dataclass(frozen=True)
class PartitionFunctions:
    z_f: float
    z_d: float
    log_z_f: float
    log_z_d: float


def _c_n(params: ModelParams, T: float, n: np.ndarray) -> np.ndarray:
    """Per-mode length scale c_n = B / n^alpha at total time T.

    B uses the amplitude at time T: constant A if A is primary, or the
    natural T-dependent A(T) when epsilon_D is primary, in which case
    c_n = (eps_D / 2)(T / (n eps_D))^alpha.
    """
    if params.epsilon_D is not None:
        sigma_t = math.sqrt(params.hbar * T / params.m)
        a_t = sigma_t * (T / params.epsilon_D) ** (params.alpha - 1.0)
    else:
        a_t = params.A
    b_len = a_t * math.sqrt(params.m * T / (4.0 * params.hbar))
    return b_len / n**params.alpha


def normalization_ratio(params: ModelParams, T: Optional[float] = None, N: int = 100_000) -> SeriesValue:
    """Log of the free restricted normalization, sum_{n<=N} ln Erf(c_n n pi / T).

    Every term is <= 0; the value only ever appears inside ratios where
    it cancels, but it is exposed for the truncation diagnostics.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    T = params.T if T is None else T
    n = np.arange(1, N + 1, dtype=float)
    terms = log_erf(_c_n(params, T, n) * n * math.pi / T)
    value = chunked_sum(terms)
    # |ln Erf| grows with n (c_n n / n^alpha decreases for alpha > 1), so
    # the next doubling is bounded by N times the last magnitude there.
    edge = float(log_erf(_c_n(params, T, np.array([2.0 * N])) * 2.0 * N * math.pi / T)[0])
    return SeriesValue(value, N, abs(edge) * N, False)


def log_pi(
    T: float,
    params: ModelParams,
    tol: float = 1e-6,
    n_terms: Optional[int] = None,
) -> PiResult:
    """ln Pi(T): truncated log-space product with rigorous tail bound.

    The omitted factors satisfy 0 <= ln[Erf(c sqrt(l + w^2))/Erf(c sqrt(l))]
    <= (1/2) ln(1 + w^2/l) (Erf concavity: Erf(k x) <= k Erf(x)), whose
    sum over n > N is below omega^2 T^2 / (2 pi^2 N).
    """
    if T <= 0:
        raise ValueError("T must be positive")
    omega = params.omega
    if omega < 0:
        raise ValueError("omega must be non-negative")
    if params.alpha <= 1 and params.epsilon_D is not None:
        raise ValueError("alpha > 1 required with epsilon_D primary")
    if omega == 0.0:
        return PiResult(0.0, T, 0, 0.0, True, params)

    def evaluate(n_max: int) -> tuple[float, float]:
        total = 0.0
        for start in range(1, n_max + 1, 1 << 20):
            n = np.arange(start, min(start + (1 << 20), n_max + 1), dtype=float)
            c = _c_n(params, T, n)
            lam_sqrt = n * math.pi / T
            hi = log_erf(c * np.sqrt(lam_sqrt**2 + omega**2))
            lo = log_erf(c * lam_sqrt)
            # each factor is >= 0 exactly; clip roundoff-negative values
            total += chunked_sum(np.maximum(hi - lo, 0.0))
        tail = omega**2 * T**2 / (2.0 * math.pi**2 * n_max)
        return total, tail

    if n_terms is not None:
        if n_terms < 1:
            raise ValueError("n_terms must be >= 1")
        value, tail = evaluate(int(n_terms))
        return PiResult(value, T, int(n_terms), tail, tail <= tol * max(1.0, abs(value)), params)

    n = 1 << 12
    while True:
        value, tail = evaluate(n)
        if tail <= tol * max(1.0, abs(value)):
            return PiResult(value, T, n, tail, True, params)
        if n >= _ADAPTIVE_CAP:
            return PiResult(value, T, n, tail, False, params)
        n *= 4


def spectrum_shift(
    T: float,
    params: ModelParams,
    n_level: int = 0,
    tol: float = 1e-6,
    n_terms: Optional[int] = None,
) -> SpectrumShift:
    """Delta omega = ln Pi(T) / T and the shifted level E^D_n."""
    if n_level < 0:
        raise ValueError("n_level must be >= 0")
    pi = log_pi(T, params, tol, n_terms)
    d_omega = pi.log_pi / T
    h, w = params.hbar, params.omega
    return SpectrumShift(
        T=T,
        delta_omega=d_omega,
        n_level=n_level,
        energy=h * w * (n_level + 0.5) - h * d_omega,
        e0=h * w * 0.5 - h * d_omega,
        spacing=h * w,
    )


def partition_functions(
    T: float, params: ModelParams, tol: float = 1e-6, n_terms: Optional[int] = None
) -> PartitionFunctions:
    """Z_F and Z_D = Z_F Pi(T) in Euclidean time (beta = T / hbar)."""
    if params.omega <= 0:
        raise ValueError("partition function requires omega > 0")
    wt = params.omega * T
    log_z_f = -0.5 * wt - math.log1p(-math.exp(-wt))
    lp = log_pi(T, params, tol, n_terms).log_pi
    return PartitionFunctions(
        z_f=math.exp(log_z_f),
        z_d=math.exp(log_z_f + lp),
        log_z_f=log_z_f,
        log_z_d=log_z_f + lp,
    )


@dataclass(frozen=True)
class UnitarityReport:
    t_grid: tuple
    delta_omega: tuple
    mean_delta_omega: float  # over the T >= eps_D sub-grid
    max_rel_deviation: float  # over the T >= eps_D sub-grid
    sub_eps_mean: Optional[float]
    sub_eps_max_rel_deviation: Optional[float]
    verdicts: tuple  # per-T strings

    def as_dict(self) -> dict:
        return {
            "mean_delta_omega": self.mean_delta_omega,
            "max_rel_deviation": self.max_rel_deviation,
            "sub_eps_mean": self.sub_eps_mean,
            "sub_eps_max_rel_deviation": self.sub_eps_max_rel_deviation,
            "rows": [
                {"T": t, "delta_omega": dw, "verdict": v}
                for t, dw, v in zip(self.t_grid, self.delta_omega, self.verdicts)
            ],
        }


def unitarity_diagnostic(
    t_grid: Iterable[float],
    params: ModelParams,
    tol: float = 1e-6,
    n_terms: Optional[int] = None,
    threshold: float = 0.1,
) -> UnitarityReport:
    """Is ln Pi linear in T?  (The Euclidean counterpart of Pi = e^{i Omega T}.)

    Over T >= eps_D the shift Delta omega(T) should be constant; its max
    relative deviation from the sub-grid mean is the unitarity figure of
    merit.  The sub-eps_D points are reported separately — there the
    product is far from exponential and the deviation is expected O(1).
    """
    t_grid = sorted(float(t) for t in t_grid)
    if not t_grid:
        raise ValueError("grid must be nonempty")
    eps_d = params.eps_d if params.alpha > 1 else 0.0
    dws = [spectrum_shift(t, params, 0, tol, n_terms).delta_omega for t in t_grid]

    def stats(idx):
        vals = [dws[i] for i in idx]
        if not vals:
            return None, None
        mean = sum(vals) / len(vals)
        if mean == 0.0:
            return mean, 0.0
        return mean, max(abs(v - mean) / abs(mean) for v in vals)

    above = [i for i, t in enumerate(t_grid) if t >= eps_d]
    below = [i for i, t in enumerate(t_grid) if t < eps_d]
    mean_above, dev_above = stats(above)
    mean_below, dev_below = stats(below)
    verdicts = []
    for i, t in enumerate(t_grid):
        if i in below:
            verdicts.append("sub-epsilon-D")
        elif mean_above and abs(dws[i] - mean_above) / abs(mean_above) <= threshold:
            verdicts.append("unitary-compatible")
        else:
            verdicts.append("non-exponential")
    return UnitarityReport(
        t_grid=tuple(t_grid),
        delta_omega=tuple(dws),
        mean_delta_omega=mean_above if mean_above is not None else math.nan,
        max_rel_deviation=dev_above if dev_above is not None else math.nan,
        sub_eps_mean=mean_below,
        sub_eps_max_rel_deviation=dev_below,
        verdicts=tuple(verdicts),
    )


def scan_E0_vs_omega(
    omega_grid: Iterable[float],
    params: ModelParams,
    T: float = 1.0,
    tol: float = 1e-6,
    n_terms: Optional[int] = 100_000,
) -> dict:
    """Ground-state energy vs omega with a weighted linear fit E0 = a + b omega.

    The fit uses the large-omega half of the grid with 1/E0^2 weights
    (relative residuals); ``residual`` is the max relative misfit there.
    """
    omegas = sorted(float(w) for w in omega_grid)
    if len(omegas) < 3:
        raise ValueError("need at least 3 grid points for the fit")
    if any(w <= 0 for w in omegas):
        raise ValueError("omega grid must be positive")
    rows = []
    for w in omegas:
        ss = spectrum_shift(T, params.with_omega(w), 0, tol, n_terms)
        rows.append((w, ss.e0))
    half = [r for r in rows if r[0] >= rows[len(rows) // 2][0]]
    x = np.array([r[0] for r in half])
    y = np.array([r[1] for r in half])
    wgt = 1.0 / y**2
    design = np.vstack([np.ones_like(x), x]).T
    coeff, *_ = np.linalg.lstsq(design * np.sqrt(wgt)[:, None], y * np.sqrt(wgt), rcond=None)
    a, b = float(coeff[0]), float(coeff[1])
    resid = np.abs((a + b * x - y) / y)
    return {
        "rows": rows,
        "a": a,
        "b": b,
        "residual": float(resid.max()),
        "rms_residual": float(np.sqrt(np.mean(resid**2))),
        "n_points": len(half),
    }


def shift_rows_to_csv(
    results: Iterable[PiResult], fh: IO[str], metadata: Optional[dict] = None
) -> None:
    """CSV `T,delta_omega,log_pi,n_terms` from a sequence of PiResults."""
    if metadata:
        for key, val in metadata.items():
            fh.write(f"# {key} = {val}\n")
    writer = csv.writer(fh)
    writer.writerow(["T", "delta_omega", "log_pi", "n_terms"])
    for r in results:
        writer.writerow(
            [
                repr(float(r.T)),
                repr(float(r.log_pi / r.T)),
                repr(float(r.log_pi)),
                int(r.n_terms),
            ]
        )
