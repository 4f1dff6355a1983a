"""Attack-set selection and measurement corruption.

A strategy is a pure function ``(theta_star, rows, t, rng) -> values`` that
returns the corrupted measurements for the attacked agent indices ``rows``
(one row per agent). Strategies may read ``theta_star``: the adversary is
assumed to know the true parameter.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Callable

import numpy as np

from .errors import ConfigError

Strategy = Callable[[np.ndarray, np.ndarray, int, np.random.Generator], np.ndarray]

MODES = ("fixed", "time-varying")


def sample_ball(rng: np.random.Generator, dim: int, radius: float, size: int | None = None) -> np.ndarray:
    """Uniform samples from the closed l2 ball of the given radius."""
    shape = (dim,) if size is None else (size, dim)
    d = rng.standard_normal(shape)
    nrm = np.linalg.norm(d, axis=-1, keepdims=True)
    nrm[nrm == 0] = 1.0
    u = rng.random(shape[:-1] + (1,))
    return radius * u ** (1.0 / dim) * d / nrm


def _none(theta, rows, t, rng, **_):
    return np.broadcast_to(theta, (len(rows), theta.size)).copy()


def _negation(theta, rows, t, rng, **_):
    return np.broadcast_to(-theta, (len(rows), theta.size)).copy()


def _constant_offset(theta, rows, t, rng, offset=None, **_):
    c = np.asarray(offset, dtype=np.float64)
    if c.shape != theta.shape:
        raise ConfigError(f"attack offset has shape {c.shape}, parameter has {theta.shape}")
    return np.broadcast_to(theta + c, (len(rows), theta.size)).copy()


def _random_bounded(theta, rows, t, rng, magnitude=1.0, **_):
    return theta + sample_ball(rng, theta.size, magnitude, size=len(rows))


STRATEGIES: dict[str, Callable] = {
    "none": _none,
    "negation": _negation,
    "constant-offset": _constant_offset,
    "random-bounded": _random_bounded,
}


@dataclass(frozen=True)
class AttackPlan:
    size: int = 0
    mode: str = "fixed"
    strategy: str = "negation"
    seed: int = 0
    offset: tuple[float, ...] | None = None
    magnitude: float = 1.0

    def __post_init__(self):
        if self.size < 0:
            raise ConfigError(f"attack.size must be >= 0, got {self.size}")
        if self.mode not in MODES:
            raise ConfigError(f"attack.mode must be one of {MODES}, got {self.mode!r}")
        if self.strategy not in STRATEGIES:
            raise ConfigError(f"unknown attack.strategy {self.strategy!r}; known: {sorted(STRATEGIES)}")
        if self.strategy == "constant-offset" and self.offset is None:
            raise ConfigError("constant-offset strategy needs attack.offset")
        if self.magnitude < 0:
            raise ConfigError("attack.magnitude must be >= 0")


@lru_cache(maxsize=64)
def _prefix(seed: int, t: int | None, n: int, size: int) -> tuple[int, ...]:
    key = [seed] if t is None else [seed, t]
    rng = np.random.default_rng(key)
    return tuple(sorted(rng.permutation(n)[:size].tolist()))


def attack_set(plan: AttackPlan, t: int, n_agents: int) -> frozenset[int]:
    """Indices of the agents whose sensors are attacked at iteration ``t``.

    Uniform without replacement. Fixed mode draws once from ``seed``;
    time-varying mode redraws from ``(seed, t)``.
    """
    if plan.size >= n_agents:
        raise ConfigError(f"attack.size={plan.size} must be < number of agents {n_agents}")
    if plan.size == 0:
        return frozenset()
    tkey = None if plan.mode == "fixed" else int(t)
    return frozenset(_prefix(int(plan.seed), tkey, int(n_agents), int(plan.size)))


@dataclass(frozen=True)
class Measurement:
    values: np.ndarray
    attacked: np.ndarray

    @property
    def n_attacked(self) -> int:
        return int(self.attacked.sum())


def measure(theta_star, plan: AttackPlan, t: int, n_agents: int) -> Measurement:
    theta = np.asarray(theta_star, dtype=np.float64).reshape(-1)
    values = np.tile(theta, (n_agents, 1))
    mask = np.zeros(n_agents, dtype=bool)
    if plan.size >= n_agents:
        raise ConfigError(f"attack.size={plan.size} must be < number of agents {n_agents}")
    tkey = None if plan.mode == "fixed" else int(t)
    rows = np.array(_prefix(int(plan.seed), tkey, int(n_agents), int(plan.size)) if plan.size else (), dtype=np.int64)
    if rows.size and plan.strategy != "none":
        rng = np.random.default_rng([int(plan.seed), int(t), 1])
        values[rows] = STRATEGIES[plan.strategy](
            theta.copy(), rows, t, rng, offset=plan.offset, magnitude=plan.magnitude
        )
    mask[rows] = True
    return Measurement(values, mask)
