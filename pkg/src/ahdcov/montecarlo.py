"""Brute-force SIR simulation of the typical downlink user.

Each trial draws the serving ground distance from the nearest-neighbour law,
then a Poisson number of interferers uniformly (in area) on the annulus
between the serving distance and a simulation window.  Every link gets an
independent unit-mean fading draw.  Transmit power cancels in the SIR and is
never multiplied in.

Coverage estimation generates the nearest interferers first, in increasing
distance, using exponential area spacings.  A trial whose partial
interference already reaches ``S / tau`` is a certain outage and stops there.
Survivors get the rest of the window as an independent Poisson annulus beyond
the last nearest-first point, which leaves the law of the SIR unchanged.

Trials are grouped into fixed blocks and each block owns a generator seeded
from ``(seed, block index)``.  Estimates therefore do not depend on how
blocks are scheduled across workers.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from .network import FadingModel, NetworkConfig
from .pathloss import gain_from_r2
from .special import DomainError

__all__ = [
    "CpEstimate",
    "StEstimate",
    "make_rng",
    "sample_serving_distance",
    "serving_distance_from_uniform",
    "sample_interferers",
    "sample_fading",
    "simulation_window",
    "link_sir",
    "sir_realization",
    "sir_block",
    "coverage_block",
    "estimate_cp",
    "estimate_st",
]

BLOCK_TRIALS = 2048
NEAREST_FIRST = 32
MIN_TRIALS = 1000
WINDOW_MEAN_COUNT = 2000.0
Z95 = 1.96


@dataclass(frozen=True)
class CpEstimate:
    mean: float
    trials: int
    ci95_halfwidth: float
    seed: int
    successes: int

    @classmethod
    def from_counts(cls, successes: int, trials: int, seed: int) -> "CpEstimate":
        p = successes / trials
        return cls(p, trials, Z95 * math.sqrt(p * (1.0 - p) / trials), seed, successes)


@dataclass(frozen=True)
class StEstimate:
    mean: float
    ci95_halfwidth: float
    cp: CpEstimate


def make_rng(seed: int, *key: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=key)))


def serving_distance_from_uniform(u, lam: float):
    """Inverse CDF of the contact distance: ``sqrt(-ln u / (pi lam))`` for ``u`` in (0, 1]."""
    return np.sqrt(-np.log(u) / (math.pi * lam))


def sample_serving_distance(lam: float, rng: np.random.Generator, size=None):
    if not lam > 0.0:
        raise DomainError(f"BS density must be positive, got {lam}")
    # 1 - U lies in (0, 1], so the log is finite
    return serving_distance_from_uniform(1.0 - rng.random(size), lam)


def sample_interferers(lam: float, r0: float, r_sim: float, rng: np.random.Generator) -> np.ndarray:
    """Ground radii of the interferers in ``(r0, r_sim]`` for one trial."""
    if not r_sim >= r0:
        raise DomainError(f"window radius {r_sim} must exceed the serving distance {r0}")
    count = rng.poisson(lam * math.pi * (r_sim * r_sim - r0 * r0))
    r2 = r_sim * r_sim - rng.random(count) * (r_sim * r_sim - r0 * r0)
    return np.sqrt(r2)


def sample_fading(fading: FadingModel, rng: np.random.Generator, size) -> np.ndarray:
    if fading.kind == "rayleigh":
        return rng.standard_exponential(size)
    if fading.nu_nc == 0.0:
        draws = rng.chisquare(fading.nu_dof, size)
    else:
        draws = rng.noncentral_chisquare(fading.nu_dof, fading.nu_nc, size)
    return draws / (fading.nu_dof + fading.nu_nc)


def simulation_window(cfg: NetworkConfig, r0, scale: float = 1.0):
    """Window radius: room for ~2000 interferers, 5 outer breakpoints, 10 ahd and 2 r0."""
    fixed = max(
        math.sqrt(WINDOW_MEAN_COUNT / (math.pi * cfg.lam)),
        5.0 * (cfg.model.breakpoints[-1] if cfg.model.breakpoints else 0.0),
        10.0 * cfg.ahd,
    )
    return scale * np.maximum(fixed, 2.0 * np.asarray(r0))


def sir_block(
    cfg: NetworkConfig, rng: np.random.Generator, trials: int, window_scale: float = 1.0
) -> np.ndarray:
    """SIR for ``trials`` independent realisations; ``inf`` when no interferer falls in the window."""
    if trials > BLOCK_TRIALS:
        return np.concatenate(
            [
                sir_block(cfg, rng, min(BLOCK_TRIALS, trials - start), window_scale)
                for start in range(0, trials, BLOCK_TRIALS)
            ]
        )
    lam, ahd = cfg.lam, cfg.ahd
    r0 = sample_serving_distance(lam, rng, trials)
    r_sim = simulation_window(cfg, r0, window_scale)
    r0_sq = r0 * r0
    area_sq = r_sim * r_sim - r0_sq
    counts = rng.poisson(lam * math.pi * area_sq)
    owner = np.repeat(np.arange(trials), counts)
    r2 = r0_sq[owner] + rng.random(owner.size) * area_sq[owner]
    h = sample_fading(cfg.fading, rng, owner.size)
    interference = np.bincount(owner, weights=h * gain_from_r2(cfg.model, r2, ahd), minlength=trials)
    signal = sample_fading(cfg.fading, rng, trials) * gain_from_r2(cfg.model, r0_sq, ahd)
    with np.errstate(divide="ignore"):
        return np.where(counts > 0, signal / np.where(counts > 0, interference, 1.0), np.inf)


def link_sir(model, ahd: float, r0: float, radii, h0: float = 1.0, h=None) -> float:
    """SIR for a serving link at ground distance ``r0`` and interferers at ``radii``.

    Fading powers default to 1.  No interferers gives ``inf``.
    """
    radii = np.asarray(radii, dtype=float)
    h = np.ones_like(radii) if h is None else np.asarray(h, dtype=float)
    if radii.size == 0:
        return math.inf
    interference = float(np.sum(h * gain_from_r2(model, radii * radii, ahd)))
    signal = h0 * float(gain_from_r2(model, np.array([r0 * r0]), ahd)[0])
    return signal / interference


def sir_realization(cfg: NetworkConfig, rng: np.random.Generator) -> tuple[float, float, np.ndarray]:
    """One full realisation: ``(sir, serving distance, interferer radii)``."""
    r0 = float(sample_serving_distance(cfg.lam, rng))
    radii = sample_interferers(cfg.lam, r0, float(simulation_window(cfg, r0)), rng)
    h = sample_fading(cfg.fading, rng, radii.size + 1)
    return link_sir(cfg.model, cfg.ahd, r0, radii, h[0], h[1:]), r0, radii


def coverage_block(
    cfg: NetworkConfig, rng: np.random.Generator, trials: int, window_scale: float = 1.0
) -> np.ndarray:
    """Coverage indicators ``SIR > tau`` for ``trials`` realisations, with early outage exit."""
    lam, ahd, tau, model = cfg.lam, cfg.ahd, cfg.tau, cfg.model
    r0 = sample_serving_distance(lam, rng, trials)
    r0_sq = r0 * r0
    r_sim = simulation_window(cfg, r0, window_scale)
    rsim_sq = r_sim * r_sim
    signal = sample_fading(cfg.fading, rng, trials) * gain_from_r2(model, r0_sq, ahd)

    # nearest-first: squared radii from cumulative Exp(1) area spacings
    spacing = rng.standard_exponential((trials, NEAREST_FIRST))
    r2 = r0_sq[:, None] + np.cumsum(spacing, axis=1) / (math.pi * lam)
    inside = r2 <= rsim_sq[:, None]
    h = sample_fading(cfg.fading, rng, (trials, NEAREST_FIRST))
    interference = np.where(inside, h * gain_from_r2(model, r2, ahd), 0.0).sum(axis=1)

    outage = tau * interference >= signal
    pending = np.flatnonzero(~outage & inside[:, -1])
    if pending.size:
        inner_sq = r2[pending, -1]
        area_sq = rsim_sq[pending] - inner_sq
        counts = rng.poisson(lam * math.pi * area_sq)
        owner = np.repeat(np.arange(pending.size), counts)
        far_r2 = inner_sq[owner] + rng.random(owner.size) * area_sq[owner]
        far_h = sample_fading(cfg.fading, rng, owner.size)
        interference[pending] += np.bincount(
            owner, weights=far_h * gain_from_r2(model, far_r2, ahd), minlength=pending.size
        )
    return signal > tau * interference


def _count_block(args) -> int:
    cfg, seed, block, size, window_scale = args
    return int(np.count_nonzero(coverage_block(cfg, make_rng(seed, block), size, window_scale)))


def _blocks(cfg: NetworkConfig, trials: int, seed: int, window_scale: float):
    full, rest = divmod(trials, BLOCK_TRIALS)
    sizes = [BLOCK_TRIALS] * full + ([rest] if rest else [])
    return [(cfg, seed, b, size, window_scale) for b, size in enumerate(sizes)]


def estimate_cp(
    cfg: NetworkConfig,
    trials: int = 100_000,
    seed: int = 0,
    workers: int = 1,
    window_scale: float = 1.0,
) -> CpEstimate:
    """Fraction of trials with SIR above ``cfg.tau`` and its 95% normal-approximation CI."""
    if trials < MIN_TRIALS:
        raise DomainError(f"need at least {MIN_TRIALS} trials, got {trials}")
    jobs = _blocks(cfg, trials, seed, window_scale)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            successes = sum(pool.map(_count_block, jobs))
    else:
        successes = sum(map(_count_block, jobs))
    return CpEstimate.from_counts(successes, trials, seed)


def estimate_st(cfg: NetworkConfig, trials: int = 100_000, seed: int = 0, workers: int = 1) -> StEstimate:
    scale = cfg.lam * math.log2(1.0 + cfg.tau)
    est = estimate_cp(cfg, trials, seed, workers)
    return StEstimate(scale * est.mean, scale * est.ci95_halfwidth, est)
