"""Saturated-innovation consensus update and its diagnostic quantities."""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .attack import Measurement
from .errors import DivergenceError
from .graph import Graph
from .schedule import GammaState


@dataclass(frozen=True)
class EstimatorState:
    x: np.ndarray
    t: int = 0

    @classmethod
    def zeros(cls, n_agents: int, dim: int) -> "EstimatorState":
        return cls(np.zeros((n_agents, dim)), 0)


def gain(y_n, x_n, gamma: float) -> float:
    """Scalar gain that clips the innovation ``y_n - x_n`` to norm ``gamma``."""
    y = np.asarray(y_n, dtype=np.float64).reshape(1, -1)
    x = np.asarray(x_n, dtype=np.float64).reshape(1, -1)
    return float(saturation_gains(y, x, gamma)[0])


def saturation_gains(y: np.ndarray, x: np.ndarray, gamma: float) -> np.ndarray:
    """Vectorized :func:`gain` over the rows of ``y`` and ``x``."""
    d = y - x
    r = np.sqrt(np.einsum("ij,ij->i", d, d))
    out = np.ones_like(r)
    big = r > gamma
    out[big] = gamma / r[big]
    return out


def siu_step(
    state: EstimatorState,
    g: Graph,
    meas: Measurement,
    alpha: float,
    beta: float,
    gamma: float,
) -> EstimatorState:
    """One synchronous update of every agent.

    All agents read the estimates at iteration ``t``; the input state is not
    modified.
    """
    x = state.x
    y = meas.values
    if x.shape != y.shape or x.shape[0] != g.n:
        raise ValueError(f"dimension mismatch: state {x.shape}, measurement {y.shape}, graph n={g.n}")
    innov = y - x
    K = saturation_gains(y, x, gamma)
    # L @ x = sum over neighbors of (x_n - x_l)
    x_next = x - beta * (g.laplacian_csr @ x) + alpha * K[:, None] * innov
    return EstimatorState(x_next, state.t + 1)


def siu_step_reference(state, g, meas, alpha, beta, gamma, order=None):
    """Agent-by-agent evaluation of :func:`siu_step`, in an arbitrary order.

    Slow; kept as a test oracle for the vectorized update.
    """
    x = state.x
    out = np.empty_like(x)
    for n in range(g.n) if order is None else order:
        cons = np.zeros(x.shape[1])
        for l in g.neighbors[n]:
            cons += x[n] - x[l]
        K = gain(meas.values[n], x[n], gamma)
        out[n] = x[n] - beta * cons + alpha * K * (meas.values[n] - x[n])
    return EstimatorState(out, state.t + 1)


@dataclass(frozen=True)
class StepDiagnostics:
    t: int
    V: float
    W: float
    max_err: float
    mean_err: float
    gamma1: float
    gamma2: float
    gains: np.ndarray | None = None

    @property
    def gamma(self) -> float:
        return self.gamma1 + self.gamma2

    @property
    def inv_v(self) -> bool:
        return self.V <= self.gamma1

    @property
    def inv_w(self) -> bool:
        return self.W <= self.gamma2

    @property
    def inv_err(self) -> bool:
        return self.max_err <= self.gamma

    @property
    def invariants_ok(self) -> bool:
        return self.inv_v and self.inv_w and self.inv_err


def diagnostics(state: EstimatorState, theta_star, gamma_state: GammaState, gains=None) -> StepDiagnostics:
    """Consensus deviation V, average error W and per-agent errors.

    V is the stacked l2 norm of the deviations from the network average and W
    the distance of that average from ``theta_star``.
    """
    theta = np.asarray(theta_star, dtype=np.float64).reshape(-1)
    x = state.x
    xbar = x.mean(axis=0)
    dev = x - xbar
    V = math.sqrt(float(np.einsum("ij,ij->", dev, dev)))
    W = math.sqrt(float(np.dot(xbar - theta, xbar - theta)))
    e = x - theta
    err = np.sqrt(np.einsum("ij,ij->i", e, e))
    if not (math.isfinite(V) and math.isfinite(W)):
        raise DivergenceError(f"non-finite estimator state at t={state.t}")
    return StepDiagnostics(
        t=state.t,
        V=V,
        W=W,
        max_err=float(err.max()),
        mean_err=float(err.mean()),
        gamma1=gamma_state.gamma1,
        gamma2=gamma_state.gamma2,
        gains=None if gains is None else np.asarray(gains),
    )
