"""Closed-form and quadrature coverage probability (CP) and spatial throughput (ST).

All results assume Rayleigh fading, full BS activity and no noise.  With a
serving ground distance ``r0`` in segment ``n`` the coverage event reduces,
through the Poisson PGFL, to

    CP = sum_n E_{r0 in [R_n, R_n+1)} exp(-pi lam G_n(d0))

where ``G_n`` is twice the interference integral over 3-D distances beyond
``d0``.  Each slope contributes an annulus term written with ``omega2`` (finite
annuli) or ``omega1`` (the unbounded outer annulus).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

from scipy import integrate

from .network import NetworkConfig
from .pathloss import PathlossModel
from .special import DomainError, omega1, omega2

__all__ = [
    "QuadratureError",
    "CpBounds",
    "interference_constant",
    "radial_expectation",
    "cp_sspm",
    "cp_dspm",
    "cp_mspm",
    "cp",
    "st",
    "cp_bounds_mspm",
]

QUAD_REL_TOL = 1e-8
QUAD_ABS_TOL = 1e-14
# Mass of the serving-distance law beyond u = pi lam r^2 = ln(1e10) is 1e-10.
TAIL_MASS_EXPONENT = math.log(1e10)
PROBABILITY_SLACK = 1e-6


class QuadratureError(ArithmeticError):
    def __init__(self, message: str, estimate: float, error: float):
        super().__init__(f"{message} (estimate={estimate:.12g}, error bound={error:.3g})")
        self.estimate = estimate
        self.error = error


@dataclass(frozen=True)
class CpBounds:
    """Lower/upper CP bounds for N >= 3 and their exponential decay rates in lam.

    ``upper`` is a sum of N exponentials and may exceed 1 at small densities.
    """

    lower: float
    upper: float
    lower_rate: float
    upper_rate: float
    q1: tuple[float, ...]


def _require_rayleigh(cfg: NetworkConfig) -> None:
    if not cfg.fading.has_analytic_cp:
        raise DomainError(f"no analytic CP for {cfg.fading.kind} fading; use the simulator")


def _as_probability(value: float) -> float:
    if not (-PROBABILITY_SLACK <= value <= 1.0 + PROBABILITY_SLACK):
        raise ArithmeticError(f"CP evaluated to {value!r}, outside [0, 1] beyond tolerance")
    return min(1.0, max(0.0, value))


def interference_constant(alpha: float, tau: float) -> float:
    """``C1 = 2 tau omega1(tau, alpha) / (alpha - 2)``."""
    return 2.0 * tau * omega1(tau, alpha) / (alpha - 2.0)


def radial_expectation(
    integrand: Callable[[float], float],
    lam: float,
    lo: float,
    hi: float,
    rel_tol: float = QUAD_REL_TOL,
    abs_tol: float = QUAD_ABS_TOL,
) -> float:
    """Integrate ``integrand(r) * 2 pi lam r exp(-pi lam r^2)`` over ``[lo, hi)``.

    The integral is taken in ``u = pi lam r^2``, where the density becomes
    ``exp(-u)``.  Mass beyond ``u = ln(1e10)`` is dropped.
    """
    if not lo < hi:
        raise DomainError(f"need lo < hi, got [{lo}, {hi})")
    scale = math.pi * lam
    u_lo = scale * lo * lo
    u_hi = min(scale * hi * hi, TAIL_MASS_EXPONENT)
    if u_lo >= u_hi:
        return 0.0

    def f(u: float) -> float:
        return integrand(math.sqrt(u / scale)) * math.exp(-u)

    value, err, *rest = integrate.quad(
        f, u_lo, u_hi, epsabs=abs_tol, epsrel=rel_tol, limit=200, full_output=1
    )
    if len(rest) > 1 and err > max(abs_tol, rel_tol * abs(value)) * 10:
        raise QuadratureError("radial quadrature did not converge", value, err)
    return value


def cp_sspm(cfg: NetworkConfig) -> float:
    """``exp(-pi lam C1 ahd^2) / (1 + C1)`` for a single-slope model."""
    _require_rayleigh(cfg)
    if cfg.model.n_slopes != 1:
        raise DomainError("cp_sspm needs a single-slope model")
    c1 = interference_constant(cfg.model.exponents[0], cfg.tau)
    return math.exp(-math.pi * cfg.lam * c1 * cfg.ahd**2) / (1.0 + c1)


def _annulus(alpha: float, y: float, a: float, b: float) -> float:
    """``2 * int_a^b x * y x^-alpha / (1 + y x^-alpha) dx``."""
    if y == 0.0:
        return 0.0
    if alpha == 0.0:
        return (b * b - a * a) * y / (1.0 + y)
    if math.isinf(b):
        if a == 0.0:
            raise DomainError("unbounded annulus needs a positive inner radius")
        return 2.0 * y * a ** (2.0 - alpha) / (alpha - 2.0) * omega1(y * a**-alpha, alpha)
    outer = b * b * omega2(b**alpha / y, alpha)
    inner = a * a * omega2(a**alpha / y, alpha) if a > 0.0 else 0.0
    return outer - inner


def interference_exponent(
    model: PathlossModel, n: int, d0: float, ahd: float, tau: float, coefficient: str = "ratio"
) -> float:
    """``G_n(d0)``: the bracket multiplying ``-pi lam`` for a serving link in segment ``n``.

    ``coefficient="ratio"`` scales the outer slopes by ``K_i / K_n``, which is
    what the serving gain ``K_n d0^-alpha_n`` implies.  ``"printed"`` uses a
    plain ``K_i`` instead, kept for comparison; both agree for ``n = 0``.
    """
    if d0 == 0.0:
        return 0.0
    if coefficient not in ("ratio", "printed"):
        raise ValueError(f"unknown coefficient variant {coefficient!r}")
    alphas = model.exponents
    consts = model.constants
    lifted = model.lifted_edges(ahd)
    d0_pow = d0 ** alphas[n]
    total = _annulus(alphas[n], tau * d0_pow, d0, lifted[n + 1])
    for i in range(n + 1, model.n_slopes):
        k = consts[i] / consts[n] if coefficient == "ratio" else consts[i]
        total += _annulus(alphas[i], tau * k * d0_pow, lifted[i], lifted[i + 1])
    return total


def cp_mspm(cfg: NetworkConfig, coefficient: str = "ratio") -> float:
    """CP for any number of slopes by per-segment radial quadrature."""
    _require_rayleigh(cfg)
    model, lam, ahd, tau = cfg.model, cfg.lam, cfg.ahd, cfg.tau
    edges = model.edges()
    total = 0.0
    for n in range(model.n_slopes):

        def integrand(r0: float, n: int = n) -> float:
            d0 = math.hypot(r0, ahd)
            return math.exp(-math.pi * lam * interference_exponent(model, n, d0, ahd, tau, coefficient))

        total += radial_expectation(integrand, lam, edges[n], edges[n + 1])
    return _as_probability(total)


def cp_dspm(cfg: NetworkConfig, breakpoint: str = "lifted") -> float:
    """Dual-slope CP from the three delta terms.

    ``breakpoint="lifted"`` splits the interference field at
    ``sqrt(R1^2 + ahd^2)``, consistent with segment selection by ground
    distance.  ``"printed"`` splits at ``R1`` itself and is kept for
    comparison; the two coincide when ``ahd = 0``.
    """
    _require_rayleigh(cfg)
    model = cfg.model
    if model.n_slopes != 2:
        raise DomainError("cp_dspm needs a dual-slope model")
    if breakpoint not in ("lifted", "printed"):
        raise ValueError(f"unknown breakpoint variant {breakpoint!r}")
    a0, a1 = model.exponents
    r1 = model.breakpoints[0]
    k1 = model.constants[1]
    lam, ahd, tau = cfg.lam, cfg.ahd, cfg.tau
    split = math.hypot(r1, ahd) if breakpoint == "lifted" else r1
    tail_coef = 2.0 * tau / (a1 - 2.0)

    def delta1(d0: float) -> float:
        if a0 == 0.0:
            return (split * split - d0 * d0) * tau / (1.0 + tau)
        return split**2 * omega2(split**a0 / (tau * d0**a0), a0) - d0**2 * omega2(1.0 / tau, a0)

    def delta2(d0: float) -> float:
        y = tau * k1 * d0**a0
        return tail_coef * k1 * d0**a0 * split ** (2.0 - a1) * omega1(y / split**a1, a1)

    delta3_coef = tail_coef * omega1(tau, a1)

    def near(r0: float) -> float:
        d0 = math.hypot(r0, ahd)
        if d0 == 0.0:
            return 1.0
        return math.exp(-math.pi * lam * (delta1(d0) + delta2(d0)))

    def far(r0: float) -> float:
        return math.exp(-math.pi * lam * delta3_coef * (r0 * r0 + ahd * ahd))

    total = radial_expectation(near, lam, 0.0, r1) + radial_expectation(far, lam, r1, math.inf)
    return _as_probability(total)


def cp(cfg: NetworkConfig) -> float:
    """CP through the most specific path for the model's slope count."""
    n = cfg.model.n_slopes
    if n == 1:
        return cp_sspm(cfg)
    if n == 2:
        return cp_dspm(cfg)
    return cp_mspm(cfg)


def st(cfg: NetworkConfig) -> float:
    """Spatial throughput ``lam * CP * log2(1 + tau)`` in bit/s/Hz/m^2."""
    return cfg.lam * cp(cfg) * math.log2(1.0 + cfg.tau)


def cp_bounds_mspm(cfg: NetworkConfig, lower_form: str = "exact") -> CpBounds:
    """Exponential lower/upper CP bounds for models with three or more slopes.

    The lower bound keeps only serving links in the outermost segment.
    ``lower_form="exact"`` evaluates that term with ``C = 2 tau omega1 /
    (alpha - 2)``.  ``"printed"`` drops the ``alpha - 2`` divisor, which
    stops being a valid bound once the outer exponent is below 3.
    """
    _require_rayleigh(cfg)
    model = cfg.model
    if model.n_slopes < 3:
        raise DomainError(f"bounds are derived for N >= 3 slopes, got N={model.n_slopes}")
    if lower_form not in ("exact", "printed"):
        raise ValueError(f"unknown lower-bound form {lower_form!r}")
    lam, ahd, tau = cfg.lam, cfg.ahd, cfg.tau
    alpha = model.exponents[-1]
    r_last = model.breakpoints[-1]
    k_last = model.constants[-1]
    rbar = math.hypot(r_last, ahd)
    w = omega1(tau, alpha)
    c = 2.0 * tau * w / (alpha - 2.0) if lower_form == "exact" else 2.0 * tau * w

    lower_rate = math.pi * (r_last**2 + c * rbar**2)
    lower = math.exp(-lam * lower_rate) / (1.0 + c)

    q1 = []
    for n in range(model.n_slopes - 1):
        kn = model.constants[n]
        q1.append(
            tau * k_last * rbar ** (2.0 - alpha) * ahd ** model.exponents[n]
            * omega1(tau * k_last / kn, alpha) / (kn * (alpha - 2.0))
        )
    upper = sum(math.exp(-2.0 * math.pi * lam * q) for q in q1) + math.exp(-math.pi * lam * r_last**2)
    upper_rate = min(math.pi * r_last**2, *(2.0 * math.pi * q for q in q1))
    return CpBounds(lower, upper, lower_rate, upper_rate, tuple(q1))
