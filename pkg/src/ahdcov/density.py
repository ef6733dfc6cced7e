"""Critical BS densities under a coverage requirement ``CP > epsilon``.

Closed forms exist for the single-slope model.  With ``C1 = 2 tau omega1 /
(alpha0 - 2)``, coverage is ``exp(-pi lam C1 ahd^2) / (1 + C1)``, so

* the requirement is reachable at some density iff ``C1 < 1/epsilon - 1``;
* ST peaks at ``lam_dagger = 1 / (pi C1 ahd^2)``;
* CP meets epsilon exactly at ``lam_star = ln[1 / (epsilon (1 + C1))] / (pi C1 ahd^2)``.

For other models :func:`critical_density_numeric` locates both densities
numerically from the analytic ST and CP curves.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from . import analytic
from .network import NetworkConfig
from .pathloss import PathlossModel
from .special import DomainError, omega1

__all__ = [
    "INFEASIBLE",
    "CriticalDensities",
    "NonUnimodalError",
    "necessary_condition",
    "lambda_star",
    "lambda_dagger",
    "critical_densities",
    "golden_section_max",
    "critical_density_numeric",
]

INFEASIBLE = None
UNBOUNDED = math.inf

GOLDEN = (math.sqrt(5.0) - 1.0) / 2.0
SCAN_POINTS = 60
# densities in BS/m^2 scanned for shape and feasibility checks
SCAN_LO, SCAN_HI = 1e-9, 1e2


class NonUnimodalError(ArithmeticError):
    pass


@dataclass(frozen=True)
class CriticalDensities:
    """``lambda_star`` is ``None`` when the requirement cannot be met, ``inf`` at zero ahd."""

    lambda_star: Optional[float]
    lambda_dagger: float

    @property
    def feasible(self) -> bool:
        return self.lambda_star is not None


def _check_epsilon(epsilon: float) -> None:
    if not 0.0 < epsilon < 1.0:
        raise DomainError(f"epsilon must lie in (0, 1), got {epsilon}")


def _c1(alpha0: float, tau: float) -> float:
    if not alpha0 > 2.0:
        raise DomainError(f"closed-form critical densities need alpha0 > 2, got {alpha0}")
    if not tau > 0.0:
        raise DomainError(f"tau must be positive, got {tau}")
    return 2.0 * tau * omega1(tau, alpha0) / (alpha0 - 2.0)


def necessary_condition(alpha0: float, tau: float, epsilon: float) -> bool:
    """True iff ``C1 < 1/epsilon - 1``; the boundary itself is infeasible."""
    _check_epsilon(epsilon)
    return _c1(alpha0, tau) < 1.0 / epsilon - 1.0


def _check_ahd(ahd: float) -> None:
    if not ahd > 0.0:
        raise DomainError(
            f"closed-form critical densities need ahd > 0, got {ahd}; they are unbounded at ahd = 0"
        )


def lambda_star(alpha0: float, tau: float, ahd: float, epsilon: float) -> Optional[float]:
    """Largest SSPM density meeting ``CP >= epsilon``, or :data:`INFEASIBLE`."""
    _check_ahd(ahd)
    if not necessary_condition(alpha0, tau, epsilon):
        return INFEASIBLE
    c1 = _c1(alpha0, tau)
    return -math.log(epsilon * (1.0 + c1)) / (math.pi * c1 * ahd * ahd)


def lambda_dagger(alpha0: float, tau: float, ahd: float) -> float:
    """SSPM density maximising ST, ``(alpha0 - 2) / (2 pi tau omega1 ahd^2)``."""
    _check_ahd(ahd)
    return (alpha0 - 2.0) / (2.0 * math.pi * tau * omega1(tau, alpha0) * ahd * ahd)


def critical_densities(alpha0: float, tau: float, ahd: float, epsilon: float) -> CriticalDensities:
    """Both SSPM critical densities; at ``ahd = 0`` they are reported as unbounded."""
    if ahd == 0.0:
        feasible = necessary_condition(alpha0, tau, epsilon)
        return CriticalDensities(UNBOUNDED if feasible else INFEASIBLE, UNBOUNDED)
    return CriticalDensities(lambda_star(alpha0, tau, ahd, epsilon), lambda_dagger(alpha0, tau, ahd))


def golden_section_max(f: Callable[[float], float], lo: float, hi: float, tol: float) -> float:
    """Maximiser of a unimodal ``f`` on ``[lo, hi]`` to within ``tol``."""
    x1 = hi - GOLDEN * (hi - lo)
    x2 = lo + GOLDEN * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 < f2:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + GOLDEN * (hi - lo)
            f2 = f(x2)
        else:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - GOLDEN * (hi - lo)
            f1 = f(x1)
    return 0.5 * (lo + hi)


def _sign_changes(values: np.ndarray, rel_noise: float = 1e-9) -> int:
    diffs = np.diff(values)
    diffs[np.abs(diffs) <= rel_noise * np.max(np.abs(values))] = 0.0
    signs = np.sign(diffs[diffs != 0.0])
    return int(np.count_nonzero(signs[1:] != signs[:-1]))


def critical_density_numeric(
    model: PathlossModel,
    ahd: float,
    tau: float,
    epsilon: Optional[float] = None,
    rel_tol: float = 1e-3,
) -> Optional[float]:
    """Numeric critical density for any pathloss model (BS/m^2).

    Without ``epsilon``: the ST maximiser, by golden-section search on
    ``log lam`` after a 60-point shape scan and a doubling bracket.  With
    ``epsilon``: the largest density whose CP still reaches ``epsilon`` when
    that is below the ST maximiser, else the ST maximiser.  Returns
    :data:`INFEASIBLE` if CP never reaches ``epsilon``.
    """
    if not ahd > 0.0:
        raise DomainError(f"numeric critical density needs ahd > 0, got {ahd}; ST grows without bound")
    if epsilon is not None:
        _check_epsilon(epsilon)

    def config(lam: float) -> NetworkConfig:
        return NetworkConfig(lam, model, ahd, tau)

    def log_st(log_lam: float) -> float:
        return analytic.st(config(math.exp(log_lam)))

    grid = np.linspace(math.log(SCAN_LO), math.log(SCAN_HI), SCAN_POINTS)
    st_grid = np.array([log_st(x) for x in grid])
    if _sign_changes(st_grid) > 1:
        raise NonUnimodalError(f"ST is not unimodal on the scan grid: {st_grid.tolist()}")

    # doubling bracket around the coarse peak
    k = int(np.argmax(st_grid))
    lo = grid[max(k - 1, 0)]
    hi = grid[min(k + 1, len(grid) - 1)]
    step = math.log(2.0)
    while lo > grid[0] - 40.0 and log_st(lo) > log_st(lo + 1e-3):
        lo -= step
    while hi < grid[-1] + 40.0 and log_st(hi) > log_st(hi - 1e-3):
        hi += step
    peak = math.exp(golden_section_max(log_st, lo, hi, math.log1p(rel_tol)))
    if epsilon is None:
        return peak

    cp_grid = np.array([analytic.cp(config(math.exp(x))) for x in grid])
    if max(cp_grid.max(), analytic.cp(config(SCAN_LO * 1e-3))) < epsilon:
        return INFEASIBLE
    if analytic.cp(config(peak)) >= epsilon:
        return peak
    # largest lam with CP >= epsilon on the decreasing branch left of the peak
    j = int(np.flatnonzero(cp_grid >= epsilon).max()) if np.any(cp_grid >= epsilon) else 0
    a = grid[j] if cp_grid[j] >= epsilon else math.log(SCAN_LO * 1e-3)
    b = min(grid[min(j + 1, len(grid) - 1)], math.log(peak))
    while b - a > math.log1p(rel_tol) * 1e-3:
        mid = 0.5 * (a + b)
        if analytic.cp(config(math.exp(mid))) >= epsilon:
            a = mid
        else:
            b = mid
    return math.exp(a)
