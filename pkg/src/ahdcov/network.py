"""Network configuration shared by the analytic and simulation paths."""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .pathloss import PathlossModel
from .special import DomainError

__all__ = ["FadingModel", "NetworkConfig", "RAYLEIGH", "rice"]


@dataclass(frozen=True)
class FadingModel:
    """Channel power gain law, normalised to unit mean.

    ``rayleigh`` draws ``Exp(1)``.  ``rice`` draws a noncentral chi-square with
    ``nu_dof`` degrees of freedom and noncentrality ``nu_nc``, divided by its
    mean ``nu_dof + nu_nc``.
    """

    kind: str = "rayleigh"
    nu_nc: float = 0.0
    nu_dof: float = 2.0

    def __post_init__(self) -> None:
        if self.kind not in ("rayleigh", "rice"):
            raise DomainError(f"unknown fading kind {self.kind!r}")
        if self.kind == "rice" and not (self.nu_dof > 0.0 and self.nu_nc >= 0.0):
            raise DomainError(f"rice fading needs nu_dof > 0 and nu_nc >= 0, got {self}")

    @property
    def has_analytic_cp(self) -> bool:
        return self.kind == "rayleigh"


RAYLEIGH = FadingModel()


def rice(nu_nc: float = 1.0, nu_dof: float = 12.0) -> FadingModel:
    return FadingModel("rice", float(nu_nc), float(nu_dof))


@dataclass(frozen=True)
class NetworkConfig:
    """One operating point: density in BS/m^2, ahd in metres, linear tau.

    ``power`` is kept for interface fidelity; SIR does not depend on it.
    """

    lam: float
    model: PathlossModel
    ahd: float = 0.0
    tau: float = 1.0
    power: float = 0.2
    fading: FadingModel = field(default=RAYLEIGH)

    def __post_init__(self) -> None:
        if not (self.lam > 0.0 and math.isfinite(self.lam)):
            raise DomainError(f"BS density must be positive, got {self.lam}")
        if not self.ahd >= 0.0:
            raise DomainError(f"antenna height difference must be nonnegative, got {self.ahd}")
        if not self.tau > 0.0:
            raise DomainError(f"decoding threshold must be positive, got {self.tau}")

    def with_(self, **changes) -> "NetworkConfig":
        return replace(self, **changes)
