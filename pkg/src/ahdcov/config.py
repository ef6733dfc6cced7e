"""Run configuration: a flat dotted-key document (YAML or JSON) plus CLI overrides.

Example::

    model.alphas: [1.5, 4]
    model.breakpoints_m: [10]
    net.tau_db: 0
    net.delta_h_m: 4.5
    net.p_dbm: 23
    sweep.variable: lambda
    sweep.lo: 100
    sweep.hi: 100000
    sweep.points: 13
    sweep.scale: log
    sweep.outputs: [analytic, mc]
    mc.trials: 100000
    mc.seed: 7

Nested sections (``model: {alphas: [...]}``) are flattened to the same keys.
Units at this boundary are BS/km^2, dB, dBm and metres; :class:`RunConfig`
converts to BS/m^2, linear ratios and watts.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Mapping, Optional

import numpy as np
import yaml

from .network import FadingModel, NetworkConfig
from .pathloss import PathlossModel, make_model
from .special import DomainError

__all__ = [
    "ConfigError",
    "SweepSpec",
    "RunConfig",
    "db_to_linear",
    "dbm_to_watt",
    "flatten",
    "load_document",
    "parse_config",
    "PER_KM2",
]

PER_KM2 = 1e-6  # BS/km^2 -> BS/m^2

OUTPUT_KINDS = ("analytic", "mc", "bounds")


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path


def db_to_linear(db: float) -> float:
    return 10.0 ** (db / 10.0)


def dbm_to_watt(dbm: float) -> float:
    return 10.0 ** ((dbm - 30.0) / 10.0)


def _number(path: str, value: Any) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(path, f"expected a number, got {value!r}")
    if not math.isfinite(value):
        raise ConfigError(path, f"expected a finite number, got {value!r}")
    return float(value)


def _int(path: str, value: Any) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        if isinstance(value, float) and value.is_integer():
            return int(value)
        raise ConfigError(path, f"expected an integer, got {value!r}")
    return value


def _numbers(path: str, value: Any) -> list[float]:
    if isinstance(value, (int, float)) and not isinstance(value, bool):
        value = [value]
    if not isinstance(value, (list, tuple)):
        raise ConfigError(path, f"expected a list of numbers, got {value!r}")
    return [_number(f"{path}[{i}]", v) for i, v in enumerate(value)]


def _choice(path: str, value: Any, choices: tuple[str, ...]) -> str:
    if value not in choices:
        raise ConfigError(path, f"expected one of {', '.join(choices)}, got {value!r}")
    return value


_SCHEMA = {
    "model.alphas",
    "model.breakpoints_m",
    "net.tau_db",
    "net.tau",
    "net.delta_h_m",
    "net.lambda_per_km2",
    "net.p_dbm",
    "fading.kind",
    "fading.nu_nc",
    "fading.nu_dof",
    "mc.trials",
    "mc.seed",
    "mc.workers",
    "sweep.variable",
    "sweep.grid",
    "sweep.lo",
    "sweep.hi",
    "sweep.points",
    "sweep.scale",
    "sweep.outputs",
    "qos.epsilon",
}


def flatten(doc: Mapping[str, Any], prefix: str = "") -> dict[str, Any]:
    flat: dict[str, Any] = {}
    for key, value in doc.items():
        path = f"{prefix}{key}"
        if isinstance(value, Mapping):
            flat.update(flatten(value, f"{path}."))
        else:
            flat[path] = value
    return flat


def load_document(path: str | Path) -> dict[str, Any]:
    text = Path(path).read_text()
    try:
        doc = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(str(path), f"not a valid YAML/JSON document: {exc}") from exc
    if doc is None:
        return {}
    if not isinstance(doc, Mapping):
        raise ConfigError(str(path), "top level must be a mapping of keys to values")
    return flatten(doc)


@dataclass(frozen=True)
class SweepSpec:
    """Grid over ``lambda`` (BS/km^2) or ``ahd`` (metres), in user units."""

    variable: str
    grid: tuple[float, ...]
    outputs: frozenset[str] = frozenset({"analytic"})
    trials: int = 100_000
    seed: int = 0

    def __post_init__(self) -> None:
        _choice("sweep.variable", self.variable, ("lambda", "ahd"))
        if any(b <= a for a, b in zip(self.grid, self.grid[1:])):
            raise ConfigError("sweep.grid", "grid must be strictly increasing")
        for kind in self.outputs:
            _choice("sweep.outputs", kind, OUTPUT_KINDS)
        if "mc" in self.outputs and self.trials < 1000:
            raise ConfigError("mc.trials", f"need at least 1000 trials with mc output, got {self.trials}")


@dataclass(frozen=True)
class RunConfig:
    model: PathlossModel
    ahd: float
    tau: float
    power: float
    lam: Optional[float]
    fading: FadingModel
    trials: int
    seed: int
    workers: int
    epsilon: Optional[float]
    sweep: Optional[SweepSpec]
    notes: tuple[str, ...] = field(default=())

    def network(self, lam: Optional[float] = None, ahd: Optional[float] = None) -> NetworkConfig:
        lam = self.lam if lam is None else lam
        if lam is None:
            raise ConfigError("net.lambda_per_km2", "a BS density is required")
        return NetworkConfig(
            lam=lam,
            model=self.model,
            ahd=self.ahd if ahd is None else ahd,
            tau=self.tau,
            power=self.power,
            fading=self.fading,
        )


def _grid(flat: Mapping[str, Any]) -> tuple[float, ...]:
    if "sweep.grid" in flat:
        return tuple(_numbers("sweep.grid", flat["sweep.grid"]))
    missing = [k for k in ("sweep.lo", "sweep.hi", "sweep.points") if k not in flat]
    if missing:
        raise ConfigError(missing[0], "give either sweep.grid or sweep.lo/hi/points")
    lo = _number("sweep.lo", flat["sweep.lo"])
    hi = _number("sweep.hi", flat["sweep.hi"])
    points = _int("sweep.points", flat["sweep.points"])
    scale = _choice("sweep.scale", flat.get("sweep.scale", "linear"), ("linear", "log"))
    if points < 0:
        raise ConfigError("sweep.points", f"must be nonnegative, got {points}")
    if points == 1:
        return (lo,)
    if scale == "log":
        if not (lo > 0 and hi > 0):
            raise ConfigError("sweep.lo", "log grids need positive bounds")
        return tuple(float(v) for v in np.logspace(math.log10(lo), math.log10(hi), points))
    return tuple(float(v) for v in np.linspace(lo, hi, points))


def parse_config(
    document: Optional[Mapping[str, Any]] = None, overrides: Optional[Mapping[str, Any]] = None
) -> RunConfig:
    """Validate a flat document with ``overrides`` (CLI flags) taking precedence."""
    flat = flatten(document or {})
    flat.update({k: v for k, v in (overrides or {}).items() if v is not None})
    unknown = sorted(set(flat) - _SCHEMA)
    if unknown:
        raise ConfigError(unknown[0], "unknown configuration key")
    notes = []

    if "model.alphas" not in flat:
        raise ConfigError("model.alphas", "required")
    alphas = _numbers("model.alphas", flat["model.alphas"])
    breakpoints = _numbers("model.breakpoints_m", flat.get("model.breakpoints_m", []))
    try:
        model = make_model(alphas, breakpoints)
    except DomainError as exc:
        raise ConfigError("model", str(exc)) from exc

    if "net.tau" in flat and "net.tau_db" in flat:
        raise ConfigError("net.tau", "give net.tau or net.tau_db, not both")
    if "net.tau" in flat:
        tau = _number("net.tau", flat["net.tau"])
    else:
        tau = db_to_linear(_number("net.tau_db", flat.get("net.tau_db", 0.0)))
    if not tau > 0.0:
        raise ConfigError("net.tau", f"decoding threshold must be positive, got {tau}")

    ahd = _number("net.delta_h_m", flat.get("net.delta_h_m", 0.0))
    if ahd < 0.0:
        raise ConfigError("net.delta_h_m", f"must be nonnegative, got {ahd}")
    power = dbm_to_watt(_number("net.p_dbm", flat.get("net.p_dbm", 23.0)))
    if "net.p_dbm" in flat:
        notes.append("net.p_dbm: transmit power has no effect on SIR (noise is neglected)")
    lam = None
    if "net.lambda_per_km2" in flat:
        lam_km2 = _number("net.lambda_per_km2", flat["net.lambda_per_km2"])
        if not lam_km2 > 0.0:
            raise ConfigError("net.lambda_per_km2", f"must be positive, got {lam_km2}")
        lam = lam_km2 * PER_KM2

    kind = _choice("fading.kind", flat.get("fading.kind", "rayleigh"), ("rayleigh", "rice"))
    if kind == "rice":
        fading = FadingModel(
            "rice",
            _number("fading.nu_nc", flat.get("fading.nu_nc", 1.0)),
            _number("fading.nu_dof", flat.get("fading.nu_dof", 12.0)),
        )
    else:
        fading = FadingModel()

    trials = _int("mc.trials", flat.get("mc.trials", 100_000))
    seed = _int("mc.seed", flat.get("mc.seed", 0))
    workers = _int("mc.workers", flat.get("mc.workers", 1))
    if workers < 1:
        raise ConfigError("mc.workers", f"must be at least 1, got {workers}")
    epsilon = None
    if "qos.epsilon" in flat:
        epsilon = _number("qos.epsilon", flat["qos.epsilon"])
        if not 0.0 < epsilon < 1.0:
            raise ConfigError("qos.epsilon", f"must lie in (0, 1), got {epsilon}")

    sweep = None
    if any(k.startswith("sweep.") for k in flat):
        outputs = flat.get("sweep.outputs", ["analytic"])
        if isinstance(outputs, str):
            outputs = [s.strip() for s in outputs.split(",") if s.strip()]
        sweep = SweepSpec(
            variable=_choice("sweep.variable", flat.get("sweep.variable", "lambda"), ("lambda", "ahd")),
            grid=_grid(flat),
            outputs=frozenset(outputs),
            trials=trials,
            seed=seed,
        )
    return RunConfig(model, ahd, tau, power, lam, fading, trials, seed, workers, epsilon, sweep, tuple(notes))
