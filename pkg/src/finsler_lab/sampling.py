"""Deterministic quasi-random sampling of admissible states (x, y)."""

from __future__ import annotations

import os

import numpy as np
from scipy.stats import norm, qmc

from .catalog import CatalogEntry, beta_norm_squared

DEFAULT_SEED = 20240607
SEED_ENV = "FINSLER_LAB_SEED"
BALL_FRACTION = 0.8
OPEN_RADIUS = 1.0
MIN_BETA_COMPLEMENT = 0.02


def default_seed() -> int:
    env = os.environ.get(SEED_ENV)
    return int(env) if env not in (None, "") else DEFAULT_SEED


def _directions(u: np.ndarray) -> np.ndarray:
    z = norm.ppf(np.clip(u, 1e-12, 1.0 - 1e-12))
    return z / np.linalg.norm(z, axis=-1, keepdims=True)


def sampling_radius(entry: CatalogEntry) -> float:
    return BALL_FRACTION * entry.domain_radius if entry.domain_radius else OPEN_RADIUS


def sample_states(entry: CatalogEntry, count: int, seed: int | None = None, radius: float | None = None):
    """Halton points in a ball of x times unit directions y, rejected outside the domain.

    Points with 1 - ||beta||^2 below a small floor are rejected too, which keeps
    every state away from the degenerate boundary of the Randers domain.
    """
    seed = default_seed() if seed is None else seed
    n = entry.n
    R = sampling_radius(entry) if radius is None else radius
    eng = qmc.Halton(d=2 * n + 1, scramble=True, seed=seed)
    xs, ys = [], []
    have = 0
    while have < count:
        u = eng.random(max(4 * (count - have), 16))
        x = _directions(u[:, :n]) * (R * u[:, n] ** (1.0 / n))[:, None]
        y = _directions(u[:, n + 1 :])
        ok = entry.metric.admissible(x)
        ok[ok] &= 1.0 - beta_norm_squared(entry.metric, x[ok]) > MIN_BETA_COMPLEMENT
        xs.append(x[ok])
        ys.append(y[ok])
        have += int(ok.sum())
    return np.concatenate(xs)[:count], np.concatenate(ys)[:count]


def sample_directions(n: int, count: int, seed: int) -> np.ndarray:
    eng = qmc.Halton(d=n, scramble=True, seed=seed)
    return _directions(eng.random(count))
