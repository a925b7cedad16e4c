"""Fourier sine-series paths, the amplitude restriction, and scale relations.

Paths are deviations from the classical trajectory, x(t) = sum_n a_n
sin(n pi t / T), so they vanish at both endpoints by construction.  The
restriction |a_n| <= A / n^alpha makes them (alpha-1)-fold continuously
differentiable and introduces the time scale epsilon_D via
(T / epsilon_D)^(alpha-1) = A / sqrt(hbar T / m).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field, replace
from typing import IO, Iterable, Optional

import numpy as np
import scipy.special as sc

__all__ = [
    "ModelParams",
    "FourierPath",
    "ScaleRelations",
    "eval_path",
    "eval_velocity",
    "sup_bounds",
    "sample_brownian",
    "differentiable_twin",
    "scale_relations",
    "coeffs_to_csv",
    "trajectory_to_csv",
    "RNG_ALGORITHM",
]

# Recorded in every sampling-related output so runs are reproducible
# across implementations of the same generator.
RNG_ALGORITHM = "numpy-PCG64-SeedSequence"


@dataclass(frozen=True)
class ModelParams:
    """Physical and control parameters; the single source of unit conventions.

    Exactly one of ``A`` (amplitude bound, length) and ``epsilon_D``
    (differentiable time scale) must be given; the other is derived.
    When ``epsilon_D`` is primary the amplitude is the T-dependent
    A(T) = sqrt(hbar T / m) (T / epsilon_D)^(alpha - 1).
    """

    m: float = 1.0
    hbar: float = 1.0
    T: float = 1.0
    alpha: float = 2.1
    A: Optional[float] = None
    epsilon_D: Optional[float] = None
    omega: float = 0.0

    def __post_init__(self):
        for name in ("m", "hbar", "T", "alpha"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if (self.A is None) == (self.epsilon_D is None):
            raise ValueError("exactly one of A and epsilon_D must be given")
        if self.A is not None and self.A <= 0:
            raise ValueError("A must be positive")
        if self.epsilon_D is not None and self.epsilon_D <= 0:
            raise ValueError("epsilon_D must be positive")
        if self.omega < 0:
            raise ValueError("omega must be non-negative")

    # -- derived scales -----------------------------------------------------

    @property
    def sigma(self) -> float:
        """Brownian coefficient scale sqrt(hbar T / m)."""
        return math.sqrt(self.hbar * self.T / self.m)

    @property
    def amplitude(self) -> float:
        """The amplitude bound A (given directly or as A(T) from epsilon_D)."""
        if self.A is not None:
            return self.A
        if self.alpha <= 1:
            raise ValueError("A(T) from epsilon_D requires alpha > 1")
        return self.sigma * (self.T / self.epsilon_D) ** (self.alpha - 1.0)

    @property
    def eps_d(self) -> float:
        """Differentiable time scale from (T/eps_D)^(alpha-1) = A/sigma."""
        if self.epsilon_D is not None:
            return self.epsilon_D
        if self.alpha <= 1:
            raise ValueError("epsilon_D from A requires alpha > 1")
        return self.T * (self.A / self.sigma) ** (-1.0 / (self.alpha - 1.0))

    @property
    def a_bar(self) -> float:
        """Dimensionless amplitude sqrt(m pi^2 / 4 hbar T) * A."""
        return math.sqrt(self.m * math.pi**2 / (4.0 * self.hbar * self.T)) * self.amplitude

    @property
    def b_len(self) -> float:
        """Length-scaled amplitude B = A sqrt(m T / 4 hbar)."""
        return self.amplitude * math.sqrt(self.m * self.T / (4.0 * self.hbar))

    @property
    def j_d(self) -> int:
        """Crossover Fourier index floor((A/sigma)^(1/(alpha-1)))."""
        if self.alpha <= 1:
            raise ValueError("j_D requires alpha > 1")
        return int(math.floor((self.amplitude / self.sigma) ** (1.0 / (self.alpha - 1.0))))

    def with_omega(self, omega: float) -> "ModelParams":
        return replace(self, omega=omega)


@dataclass(frozen=True)
class FourierPath:
    """Truncated sine series x(t) = sum_{n=1}^{N} a_n sin(n pi t / T)."""

    T: float
    coeffs: np.ndarray = field(repr=False)

    def __post_init__(self):
        object.__setattr__(self, "coeffs", np.asarray(self.coeffs, dtype=float))
        if self.T <= 0:
            raise ValueError("T must be positive")
        if self.coeffs.ndim != 1 or self.coeffs.size < 1:
            raise ValueError("coeffs must be a non-empty 1-D vector")

    def eval(self, t):
        return eval_path(self, t)

    def velocity(self, t):
        return eval_velocity(self, t)

    def restriction_satisfied(self, A: float, alpha: float, rtol: float = 1e-12) -> bool:
        """Whether |a_n| <= A / n^alpha holds for every stored mode."""
        n = np.arange(1, self.coeffs.size + 1, dtype=float)
        return bool(np.all(np.abs(self.coeffs) <= A / n**alpha * (1.0 + rtol)))


def _check_times(p: FourierPath, t) -> np.ndarray:
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > p.T):
        raise ValueError("t outside [0, T]")
    return t


def eval_path(p: FourierPath, t):
    """x(t): exact finite sum over the stored coefficients."""
    t = _check_times(p, t)
    n = np.arange(1, p.coeffs.size + 1, dtype=float)
    out = np.sin(np.multiply.outer(t, n) * (math.pi / p.T)) @ p.coeffs
    return float(out) if out.ndim == 0 else out


def eval_velocity(p: FourierPath, t):
    """dx/dt: termwise derivative of the sine series."""
    t = _check_times(p, t)
    n = np.arange(1, p.coeffs.size + 1, dtype=float)
    out = np.cos(np.multiply.outer(t, n) * (math.pi / p.T)) @ (p.coeffs * n * math.pi / p.T)
    return float(out) if out.ndim == 0 else out


def sup_bounds(params: ModelParams) -> dict:
    """Supremum bounds on |x(t)| and |v(t)| over the whole path space.

    x is bounded by A zeta(alpha) iff alpha > 1; the velocity by
    (pi A / T) zeta(alpha - 1) iff alpha > 2.
    """
    if params.alpha > 1:
        x_bound = params.amplitude * float(sc.zeta(params.alpha))
    else:
        x_bound = math.inf
    if params.alpha > 2:
        v_bound = math.pi * params.amplitude / params.T * float(sc.zeta(params.alpha - 1.0))
    else:
        v_bound = math.inf
    return {"x_bound": x_bound, "v_bound": v_bound}


def sample_brownian(params: ModelParams, N: int, seed: int) -> FourierPath:
    """Random Fourier path a_j = sigma N_j / j with N_j ~ Uniform(-1, 1).

    The N_j law is uniform on [-1, 1]: the simplest i.i.d. mean-zero
    choice with |N_j| <= 1.  Deterministic given the seed.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed)))
    n_j = rng.uniform(-1.0, 1.0, size=N)
    j = np.arange(1, N + 1, dtype=float)
    return FourierPath(T=params.T, coeffs=params.sigma * n_j / j)


def differentiable_twin(p: FourierPath, params: ModelParams) -> dict:
    """Clamp the high modes of ``p`` onto the restricted path space.

    Modes j <= j_D are copied verbatim; modes above are clamped to
    sign(a_j) min(|a_j|, A/j^alpha).  Idempotent, and the twin always
    satisfies the restriction for a path sampled via sample_brownian.
    """
    if params.alpha <= 1:
        raise ValueError("differentiable twin requires alpha > 1 (no finite j_D)")
    j_d = params.j_d
    a = params.amplitude
    j = np.arange(1, p.coeffs.size + 1, dtype=float)
    cap = a / j**params.alpha
    clamped = np.sign(p.coeffs) * np.minimum(np.abs(p.coeffs), cap)
    coeffs = np.where(j <= j_d, p.coeffs, clamped)
    return {"twin": FourierPath(T=p.T, coeffs=coeffs), "j_D": j_d}


@dataclass(frozen=True)
class ScaleRelations:
    epsilon_D: float
    A_of_T: float
    j_D: int


def scale_relations(params: ModelParams) -> ScaleRelations:
    """epsilon_D, A(T) and j_D; the A <-> epsilon_D round trip is exact."""
    if params.alpha <= 1:
        raise ValueError("scale relations require alpha > 1")
    return ScaleRelations(epsilon_D=params.eps_d, A_of_T=params.amplitude, j_D=params.j_d)


# ---------------------------------------------------------------------------
# CSV export
# ---------------------------------------------------------------------------


def _write_metadata(fh: IO[str], metadata: Optional[dict]) -> None:
    if metadata:
        for key, val in metadata.items():
            fh.write(f"# {key} = {val}\n")


def coeffs_to_csv(p: FourierPath, fh: IO[str], metadata: Optional[dict] = None) -> None:
    """Write the coefficient vector as ``n,a_n`` rows with a '#' header."""
    _write_metadata(fh, metadata)
    writer = csv.writer(fh)
    writer.writerow(["n", "a_n"])
    for n, a in enumerate(p.coeffs, start=1):
        writer.writerow([n, repr(float(a))])


def trajectory_to_csv(
    p: FourierPath, t_grid: Iterable[float], fh: IO[str], metadata: Optional[dict] = None
) -> None:
    """Write sampled trajectory rows ``t,x`` on a caller-specified grid."""
    t_grid = np.asarray(list(t_grid), dtype=float)
    x = eval_path(p, t_grid)
    _write_metadata(fh, metadata)
    writer = csv.writer(fh)
    writer.writerow(["t", "x"])
    for t, xi in zip(t_grid, np.atleast_1d(x)):
        writer.writerow([repr(float(t)), repr(float(xi))])
