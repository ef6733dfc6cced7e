"""Restricted Gauss hypergeometric functions used by the coverage formulas.

Only the family 2F1(1, b; b+1; -x) with b > 0 and x >= 0 is supported.  Both
omega functions are members of it:

    omega1(x, alpha) = 2F1(1, 1 - 2/alpha; 2 - 2/alpha; -x)
    omega2(x, alpha) = 2F1(1, 2/alpha; 1 + 2/alpha; -x)

Three evaluation regimes cover the half line:

* ``x < 0.5``: the defining power series ``b * sum (-x)^k / (b + k)``.
* ``0.5 <= x <= 2``: the Pfaff transform
  ``(1 + x)^-1 * 2F1(1, 1; b + 1; x / (1 + x))``.
* ``x > 2``: the connection formula around infinity,
  ``pi b / sin(pi b) * x^-b - b * sum (-1)^k x^-(k+1) / (k + 1 - b)``,
  with the pole pair at integer ``b`` combined analytically.
"""

from __future__ import annotations

import math

__all__ = ["DomainError", "hyp2f1_1b", "omega1", "omega2"]

SERIES_CUTOFF = 0.5
PFAFF_CUTOFF = 2.0
_REL_STOP = 1e-17
_MAX_TERMS = 10_000
# Below this distance from an integer, b is treated with the combined pole pair.
_NEAR_INT = 1e-2


class DomainError(ValueError):
    """Raised when an argument lies outside a function's mathematical domain."""


def _direct_series(b: float, x: float) -> float:
    # b * sum_k (-x)^k / (b + k); alternating, |x| < 1
    total = 1.0
    power = 1.0
    for k in range(1, _MAX_TERMS):
        power *= -x
        term = b * power / (b + k)
        total += term
        if abs(term) < _REL_STOP * abs(total):
            return total
    raise ArithmeticError(f"power series did not converge for b={b}, x={x}")


def _pfaff_series(b: float, x: float) -> float:
    # (1+x)^-1 sum_k k! / (b+1)_k w^k,  w = x / (1 + x)
    w = x / (1.0 + x)
    total = 1.0
    term = 1.0
    for k in range(_MAX_TERMS):
        term *= (k + 1.0) / (b + 1.0 + k) * w
        total += term
        if term < _REL_STOP * total:
            return total / (1.0 + x)
    raise ArithmeticError(f"Pfaff series did not converge for b={b}, x={x}")


def _pole_pair(eps: float, log_x: float) -> float:
    """Return ``pi x^eps / sin(pi eps) - 1/eps`` stably for small ``eps``."""
    if eps == 0.0:
        return log_x
    if abs(eps) >= _NEAR_INT:
        return math.pi * math.exp(eps * log_x) / math.sin(math.pi * eps) - 1.0 / eps
    pe2 = (math.pi * eps) ** 2
    # g = pi eps / sin(pi eps) = 1 + (pi eps)^2/6 + 7 (pi eps)^4/360 + ...
    g_minus_one_over_eps = math.pi**2 * eps * (
        1.0 / 6.0 + pe2 * (7.0 / 360.0 + pe2 * (31.0 / 15120.0 + pe2 * 127.0 / 604800.0))
    )
    g = 1.0 + eps * g_minus_one_over_eps
    return g * math.expm1(eps * log_x) / eps + g_minus_one_over_eps


def _connection(b: float, x: float) -> float:
    m = max(1, round(b))
    eps = m - b
    log_x = math.log(x)
    # sin(pi b) = (-1)^(m-1) sin(pi eps); the k = m-1 tail term shares the pole
    sign = -1.0 if (m - 1) % 2 else 1.0
    total = b * sign * x ** (-m) * _pole_pair(eps, log_x)
    inv_x = 1.0 / x
    power = inv_x
    tail = 0.0
    # off the pole |k + 1 - b| >= 1/2, so the remainder is below 2 x^-(k+1) / (1 - 1/x)
    remainder_scale = 2.0 / (1.0 - inv_x)
    for k in range(_MAX_TERMS):
        if k != m - 1:
            tail += (-power if k % 2 else power) / (k + 1.0 - b)
        power *= inv_x
        if power * remainder_scale < _REL_STOP * abs(total / b - tail):
            break
    else:
        raise ArithmeticError(f"connection series did not converge for b={b}, x={x}")
    return total - b * tail


def hyp2f1_1b(b: float, x: float) -> float:
    """Evaluate ``2F1(1, b; b+1; -x)`` for ``b > 0`` and ``x >= 0``.

    The result lies in ``(0, 1]`` and equals 1 at ``x = 0``.  Relative
    accuracy is around 1e-13 over the whole half line.
    """
    b = float(b)
    x = float(x)
    if not b > 0.0 or math.isinf(b):
        raise DomainError(f"b must be a positive finite number, got {b}")
    if not x >= 0.0:
        raise DomainError(f"x must be nonnegative, got {x}")
    if x == 0.0:
        return 1.0
    if math.isinf(x):
        return 0.0
    if x < SERIES_CUTOFF:
        return _direct_series(b, x)
    if x <= PFAFF_CUTOFF:
        return _pfaff_series(b, x)
    return _connection(b, x)


def omega1(x: float, alpha: float) -> float:
    """``2F1(1, 1 - 2/alpha; 2 - 2/alpha; -x)``, strictly decreasing in ``x``."""
    if not alpha > 2.0:
        raise DomainError(f"omega1 needs alpha > 2, got {alpha}")
    return hyp2f1_1b(1.0 - 2.0 / alpha, x)


def omega2(x: float, alpha: float) -> float:
    """``2F1(1, 2/alpha; 1 + 2/alpha; -x)``; any ``alpha > 0`` is accepted."""
    if not alpha > 0.0:
        raise DomainError(f"omega2 needs alpha > 0, got {alpha}")
    b = 2.0 / alpha
    if math.isinf(b):
        # subnormal alpha: the b -> infinity limit
        return 1.0 / (1.0 + x)
    return hyp2f1_1b(b, x)
