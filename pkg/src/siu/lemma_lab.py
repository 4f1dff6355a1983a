"""Scalar and coupled time-varying linear recursions with decaying rates.

All systems are driven by

    r1(t) = c1 / (t+1)**delta1,   r2(t) = c2 / (t+1)**delta2.

Trajectories are stored every step for ``t < dense_until`` and at
log-spaced times afterwards; running suprema are tracked over every step.
"""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, DivergenceError, InconclusiveError


@dataclass(frozen=True)
class ScalarSystemConfig:
    c1: float = 1.0
    c2: float = 1.0
    delta1: float = 0.5
    delta2: float = 0.5
    c3: float = 1.0
    c4: float = 1.0
    c5: float = 1.0
    c6: float = 1.0
    c7: float = 1.0
    v0: float = 0.0
    w0: float = 0.0

    def r1(self, t: int) -> float:
        return self.c1 / (t + 1) ** self.delta1

    def r2(self, t: int) -> float:
        return self.c2 / (t + 1) ** self.delta2


@dataclass
class TrajectoryRecord:
    t: np.ndarray
    v: np.ndarray
    w: np.ndarray | None
    horizon: int
    sup_v: float
    sup_w: float | None = None

    def series(self, component: str = "v") -> np.ndarray:
        if component == "v":
            return self.v
        if self.w is None:
            raise ValueError("scalar trajectory has no w component")
        return self.w

    def to_csv(self, path: str | Path) -> None:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            wr = csv.writer(fh)
            wr.writerow(["t", "v", "w"])
            for i, t in enumerate(self.t):
                wr.writerow([int(t), repr(float(self.v[i])), "" if self.w is None else repr(float(self.w[i]))])


def sample_times(T: int, dense_until: int = 1000, n_log: int = 1200) -> np.ndarray:
    dense = np.arange(min(T, dense_until) + 1)
    if T <= dense_until:
        return dense
    logs = np.unique(np.geomspace(dense_until, T, n_log).round().astype(np.int64))
    return np.union1d(dense, np.append(logs, T))


def _check_pre(cfg: ScalarSystemConfig, T: int, strict: bool):
    if T < 1:
        raise ConfigError("horizon T must be >= 1")
    if not 0 < cfg.delta2 <= cfg.delta1 < 1:
        raise ConfigError(f"need 0 < delta2 <= delta1 < 1, got delta1={cfg.delta1}, delta2={cfg.delta2}")
    if strict and not cfg.delta2 < cfg.delta1:
        raise ConfigError("this system needs delta2 < delta1 strictly")


def _diverged(name, t):
    return DivergenceError(f"{name} recursion diverged (non-finite value) at t={t}")


def simulate_basic(cfg: ScalarSystemConfig, T: int, dense_until: int = 1000, n_log: int = 1200) -> TrajectoryRecord:
    """v[t+1] = (1 - r2(t)) v[t] + r1(t)."""
    _check_pre(cfg, T, strict=False)
    ts = sample_times(T, dense_until, n_log)
    out = np.empty(len(ts))
    c1, c2, d1, d2 = cfg.c1, cfg.c2, cfg.delta1, cfg.delta2
    v = float(cfg.v0)
    sup = abs(v)
    out[0] = v
    k = 1
    for t in range(T):
        v = (1.0 - c2 / (t + 1) ** d2) * v + c1 / (t + 1) ** d1
        a = abs(v)
        if a > sup:
            sup = a
        if t + 1 == ts[k]:
            if not math.isfinite(v):
                raise _diverged("basic", t + 1)
            out[k] = v
            k += 1
    if not math.isfinite(sup):
        raise _diverged("basic", T)
    return TrajectoryRecord(ts, out, None, T, sup)


def simulate_modified(cfg: ScalarSystemConfig, T: int, dense_until: int = 1000, n_log: int = 1200) -> TrajectoryRecord:
    """v[t+1] = (1 - c3 r2(t) + c4 r1(t)) v[t] + c5 r1(t)."""
    _check_pre(cfg, T, strict=True)
    ts = sample_times(T, dense_until, n_log)
    out = np.empty(len(ts))
    c1, c2, d1, d2 = cfg.c1, cfg.c2, cfg.delta1, cfg.delta2
    c3, c4, c5 = cfg.c3, cfg.c4, cfg.c5
    v = float(cfg.v0)
    sup = abs(v)
    out[0] = v
    k = 1
    for t in range(T):
        r1 = c1 / (t + 1) ** d1
        r2 = c2 / (t + 1) ** d2
        v = (1.0 - c3 * r2 + c4 * r1) * v + c5 * r1
        a = abs(v)
        if a > sup:
            sup = a
        if t + 1 == ts[k]:
            if not math.isfinite(v):
                raise _diverged("modified", t + 1)
            out[k] = v
            k += 1
    if not math.isfinite(sup):
        raise _diverged("modified", T)
    return TrajectoryRecord(ts, out, None, T, sup)


def simulate_coupled(cfg: ScalarSystemConfig, T: int, dense_until: int = 1000, n_log: int = 1200) -> TrajectoryRecord:
    """Coupled pair

    v[t+1] = (1 - c3 r1(t)) v[t] + c4 r1(t) w[t]
    w[t+1] = (1 - c5 r2(t) + c6 r1(t)) w[t] + c7 r1(t) v[t]
    """
    _check_pre(cfg, T, strict=True)
    ts = sample_times(T, dense_until, n_log)
    vs = np.empty(len(ts))
    ws = np.empty(len(ts))
    c1, c2, d1, d2 = cfg.c1, cfg.c2, cfg.delta1, cfg.delta2
    c3, c4, c5, c6, c7 = cfg.c3, cfg.c4, cfg.c5, cfg.c6, cfg.c7
    v, w = float(cfg.v0), float(cfg.w0)
    sv, sw = abs(v), abs(w)
    vs[0], ws[0] = v, w
    k = 1
    for t in range(T):
        r1 = c1 / (t + 1) ** d1
        r2 = c2 / (t + 1) ** d2
        v, w = (1.0 - c3 * r1) * v + c4 * r1 * w, (1.0 - c5 * r2 + c6 * r1) * w + c7 * r1 * v
        if abs(v) > sv:
            sv = abs(v)
        if abs(w) > sw:
            sw = abs(w)
        if t + 1 == ts[k]:
            if not (math.isfinite(v) and math.isfinite(w)):
                raise _diverged("coupled", t + 1)
            vs[k], ws[k] = v, w
            k += 1
    if not (math.isfinite(sv) and math.isfinite(sw)):
        raise _diverged("coupled", T)
    return TrajectoryRecord(ts, vs, ws, T, sv, sw)


def decay_rate_check(
    traj: TrajectoryRecord,
    delta0: float,
    tail_fraction: float = 0.5,
    shrink_factor: float = 0.9,
    component: str = "v",
    min_samples: int = 100,
) -> bool:
    """Finite-horizon surrogate for ``(t+1)**delta0 * |v_t| -> 0``.

    Over the last ``tail_fraction`` of the horizon, the maximum of the scaled
    sequence in the final quarter of that tail must be at most
    ``shrink_factor`` times its maximum in the first quarter.
    """
    if delta0 < 0:
        raise ValueError("delta0 must be >= 0")
    if not 0 < tail_fraction < 1:
        raise ValueError("tail_fraction must lie in (0, 1)")
    t = np.asarray(traj.t, dtype=np.float64)
    x = np.abs(traj.series(component))
    start = traj.horizon * (1.0 - tail_fraction)
    span = traj.horizon - start
    sel = t >= start
    if sel.sum() < min_samples:
        raise InconclusiveError(f"only {int(sel.sum())} samples in the tail (< {min_samples})")
    tt, xx = t[sel], x[sel]
    scaled = (tt + 1.0) ** delta0 * xx
    first = scaled[tt <= start + 0.25 * span]
    last = scaled[tt >= start + 0.75 * span]
    if first.size == 0 or last.size == 0:
        raise InconclusiveError("a tail quarter holds no samples")
    return bool(last.max() <= shrink_factor * first.max())


def trajectory_from_series(t, values, horizon: int | None = None) -> TrajectoryRecord:
    """Wrap an externally produced series (e.g. logged errors) for the checks."""
    t = np.asarray(t, dtype=np.int64)
    v = np.asarray(values, dtype=np.float64)
    if not np.all(np.isfinite(v)):
        raise DivergenceError("series contains non-finite values")
    return TrajectoryRecord(t, v, None, int(t[-1]) if horizon is None else horizon, float(np.abs(v).max()))


def gamma_mapping(s: float, lambda2: float, n_agents: int, a: float, b: float, tau1: float, tau2: float, eta: float) -> ScalarSystemConfig:
    """Constants under which the coupled system reproduces the threshold recursion.

    v plays gamma2 and w plays gamma1; r1 is the innovation step size and r2
    the consensus step size.
    """
    return ScalarSystemConfig(
        c1=a,
        c2=b,
        delta1=tau1,
        delta2=tau2,
        c3=1.0 - 2.0 * s,
        c4=1.0,
        c5=lambda2,
        c6=1.0 + math.sqrt(n_agents),
        c7=2.0 * math.sqrt(n_agents),
        v0=eta,
        w0=0.0,
    )


def random_config(rng: np.random.Generator, equal_rates: bool = False) -> ScalarSystemConfig:
    """Random constants satisfying the lemma hypotheses from t = 0.

    Rate scales and couplings are uniform on [0.1, 1]; delta2 on [0.05, 0.45]
    and delta1 on [delta2 + 0.2, 0.95] (or ``delta1 = delta2``). Initial
    conditions are uniform on [0.5, 5]. Draws are rejected unless every
    recursion coefficient already lies in [0, 1] at t = 0, i.e.
    ``c5*c2 >= c6*c1`` and ``c3*c2 >= c4*c1``; otherwise the transient can
    grow for longer than any desk-scale horizon before contracting.
    """
    while True:
        d2 = rng.uniform(0.05, 0.45)
        d1 = d2 if equal_rates else rng.uniform(d2 + 0.2, 0.95)
        c = rng.uniform(0.1, 1.0, size=7)
        v0, w0 = rng.uniform(0.5, 5.0, size=2)
        cfg = ScalarSystemConfig(
            c1=c[0], c2=c[1], delta1=d1, delta2=d2,
            c3=c[2], c4=c[3], c5=c[4], c6=c[5], c7=c[6],
            v0=v0, w0=w0,
        )
        if cfg.c5 * cfg.c2 >= cfg.c6 * cfg.c1 and cfg.c3 * cfg.c2 >= cfg.c4 * cfg.c1:
            return cfg
