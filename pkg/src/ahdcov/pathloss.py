"""Multi-slope pathloss with an antenna height difference.

A model with N slopes attenuates a link as ``K_n * d^-alpha_n`` where ``d`` is
the 3-D antenna distance and ``n`` is the segment holding the 2-D ground
distance, ``R_n <= r < R_n+1``.  Selecting the segment by ``r`` is the same as
comparing ``d`` against the lifted breakpoints ``sqrt(R_n^2 + ahd^2)``.  With
``ahd > 0`` this leaves small jumps in the gain at each breakpoint, because the
continuity constants ``K_n`` are fitted at ``R_n`` rather than at the lifted
breakpoints.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .special import DomainError

__all__ = ["PathlossModel", "Link", "make_model", "segment_index", "gain", "gain_from_r2"]


@dataclass(frozen=True)
class PathlossModel:
    exponents: tuple[float, ...]
    breakpoints: tuple[float, ...]
    constants: tuple[float, ...] = field(init=False)

    def __post_init__(self) -> None:
        alphas = tuple(float(a) for a in self.exponents)
        radii = tuple(float(r) for r in self.breakpoints)
        if not alphas:
            raise DomainError("a pathloss model needs at least one exponent")
        if len(alphas) != len(radii) + 1:
            raise DomainError(
                f"{len(alphas)} exponents need {len(alphas) - 1} breakpoints, got {len(radii)}"
            )
        if any(not math.isfinite(a) for a in alphas) or alphas[0] < 0.0:
            raise DomainError(f"exponents must be finite and nonnegative, got {alphas}")
        if any(b < a for a, b in zip(alphas, alphas[1:])):
            raise DomainError(f"exponents must be non-decreasing, got {alphas}")
        if not alphas[-1] > 2.0:
            raise DomainError(f"the last exponent must exceed 2 (alpha_N-1 > 2), got {alphas[-1]}")
        if any(not (math.isfinite(r) and r > 0.0) for r in radii):
            raise DomainError(f"breakpoints must be positive and finite, got {radii}")
        if any(b <= a for a, b in zip(radii, radii[1:])):
            raise DomainError(f"breakpoints must be strictly increasing, got {radii}")

        constants = [1.0]
        for i, r in enumerate(radii, start=1):
            constants.append(constants[-1] * r ** (alphas[i] - alphas[i - 1]))
        object.__setattr__(self, "exponents", alphas)
        object.__setattr__(self, "breakpoints", radii)
        object.__setattr__(self, "constants", tuple(constants))

    @property
    def n_slopes(self) -> int:
        return len(self.exponents)

    @property
    def kind(self) -> str:
        return {1: "sspm", 2: "dspm"}.get(self.n_slopes, "mspm")

    def edges(self) -> tuple[float, ...]:
        """Segment edges ``R_0 = 0, R_1, ..., R_N = inf``."""
        return (0.0, *self.breakpoints, math.inf)

    def lifted_edges(self, ahd: float) -> tuple[float, ...]:
        """Segment edges in 3-D distance, ``sqrt(R_n^2 + ahd^2)``."""
        return tuple(math.hypot(r, ahd) for r in self.edges())

    def to_dict(self) -> dict:
        return {"alphas": list(self.exponents), "breakpoints_m": list(self.breakpoints)}


def make_model(exponents: Sequence[float], breakpoints: Sequence[float] = ()) -> PathlossModel:
    return PathlossModel(tuple(exponents), tuple(breakpoints))


@dataclass(frozen=True)
class Link:
    r2d: float
    ahd: float = 0.0

    def __post_init__(self) -> None:
        if not (self.r2d >= 0.0 and self.ahd >= 0.0):
            raise DomainError(f"link distances must be nonnegative, got r2d={self.r2d}, ahd={self.ahd}")

    @property
    def d3d(self) -> float:
        return math.hypot(self.r2d, self.ahd)


def segment_index(model: PathlossModel, r2d: float) -> int:
    """Index ``n`` with ``R_n <= r2d < R_n+1``; breakpoints belong to the upper segment."""
    if r2d < 0.0:
        raise DomainError(f"r2d must be nonnegative, got {r2d}")
    n = 0
    for r in model.breakpoints:
        if r2d >= r:
            n += 1
        else:
            break
    return n


def gain(model: PathlossModel, link: Link) -> float:
    d = link.d3d
    if d == 0.0:
        raise DomainError("gain is undefined at zero 3-D distance")
    n = segment_index(model, link.r2d)
    try:
        return model.constants[n] * d ** (-model.exponents[n])
    except OverflowError:
        return math.inf


def gain_from_r2(model: PathlossModel, r2: np.ndarray, ahd: float) -> np.ndarray:
    """Vectorised gain from squared ground distances.

    Works on squared radii to avoid a square root per sample.
    """
    d2 = r2 + ahd * ahd
    if model.n_slopes == 1:
        return np.power(d2, -0.5 * model.exponents[0])
    edges2 = np.square(np.asarray(model.breakpoints))
    seg = np.searchsorted(edges2, r2, side="right")
    half_alpha = 0.5 * np.asarray(model.exponents)[seg]
    log_k = np.log(np.asarray(model.constants))[seg]
    return np.exp(log_k - half_alpha * np.log(d2))
