"""Scale-dependent canonical commutator and the GUP-form coefficient.

At resolution eps the equal-time commutator expectation is
<[x, p]> = m eps <v^2>(eps): exactly hbar for the free measure (to leading
order in eps), but vanishing linearly in eps deep below epsilon_D for the
restricted one.  Recasting the small correction in canonical language
gives [x, p] = hbar (1 - beta p^2) with beta = (2/pi)^2 / p_UV^2, valid
for p below p_D = sqrt(hbar m / epsilon_D).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import IO, Iterable, Optional

from .paths import ModelParams
from .velocity import regime_report, v2_diff, v2_feynman

__all__ = [
    "CommutatorReport",
    "commutator_expectation",
    "momentum_squared",
    "gup_coefficient",
    "commutator_rows_to_csv",
]


@dataclass(frozen=True)
class CommutatorReport:
    eps: float
    value: float  # action units, m * eps * <v^2>(eps)
    regime: str  # "sub_eps_D" | "super_eps_D"
    beta: Optional[float]  # (2/pi)^2 / p_uv^2; None when alpha <= 2
    p_D: Optional[float]  # validity boundary sqrt(hbar m / eps_D)


def commutator_expectation(
    eps: float, params: ModelParams, model: str = "differentiable", tol: float = 1e-9
) -> CommutatorReport:
    """<[x, p]> at resolution eps: the identity m * eps * <v^2> exactly."""
    if model not in ("feynman", "differentiable"):
        raise ValueError("model must be 'feynman' or 'differentiable'")
    if model == "feynman":
        v2 = v2_feynman(eps, params, tol)
    else:
        v2 = v2_diff(eps, params, tol)
    value = params.m * eps * v2
    if params.alpha > 1:
        regime = "sub_eps_D" if eps < params.eps_d else "super_eps_D"
    else:
        regime = "super_eps_D"
    beta = p_d = None
    if params.alpha > 2:
        g = gup_coefficient(params)
        beta, p_d = g["beta"], g["p_D"]
    return CommutatorReport(eps=eps, value=value, regime=regime, beta=beta, p_D=p_d)


def momentum_squared(eps: float, params: ModelParams, model: str = "differentiable") -> float:
    """Heuristic identification <p^2> = m^2 <v^2>(eps), kept as its own step."""
    v2 = v2_feynman(eps, params) if model == "feynman" else v2_diff(eps, params)
    return params.m**2 * v2


def gup_coefficient(params: ModelParams) -> dict:
    """beta, p_uv and p_D of the modified commutator [x,p] = hbar(1 - beta p^2).

    beta = (2/pi)^2 / p_uv^2 coincides with C / hbar^2 from the velocity
    regime report (same algebra, two routes).
    """
    rep = regime_report(params)  # raises for alpha <= 2
    beta = (2.0 / math.pi) ** 2 / rep.p_uv**2
    p_d = math.sqrt(params.hbar * params.m / rep.epsilon_D)
    return {"beta": beta, "p_uv": rep.p_uv, "p_D": p_d}


def commutator_rows_to_csv(
    rows: Iterable[CommutatorReport], fh: IO[str], metadata: Optional[dict] = None
) -> None:
    if metadata:
        for key, val in metadata.items():
            fh.write(f"# {key} = {val}\n")
    writer = csv.writer(fh)
    writer.writerow(["eps", "commutator", "regime"])
    for row in rows:
        writer.writerow([repr(float(row.eps)), repr(float(row.value)), row.regime])
