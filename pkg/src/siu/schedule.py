"""Decaying step sizes and the coupled saturation-threshold recursion."""
from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import DivergenceError, InvariantViolation


@dataclass(frozen=True)
class ScheduleConfig:
    """Step-size parameters.

    alpha_t = a / (t+1)**tau1 scales the innovation, beta_t = b / (t+1)**tau2
    the consensus term. ``s`` is the resilience index and ``eta`` bounds the
    norm of the unknown parameter. The coupling constants are derived from
    ``n_agents`` and cannot be set directly.
    """

    a: float
    b: float
    tau1: float
    tau2: float
    s: float
    eta: float
    n_agents: int

    @property
    def kappa1(self) -> float:
        return 1.0 + math.sqrt(self.n_agents)

    @property
    def kappa2(self) -> float:
        return 2.0 * math.sqrt(self.n_agents)


# defaults of the N=300 study
DEFAULT_STEPS = dict(a=1.54e-4, b=3.78e-2, tau1=0.15, tau2=0.001)


def validate(config: ScheduleConfig, lambdaN: float, lambda2: float) -> list[str]:
    """Return the list of violated parameter constraints (empty if valid)."""
    c = config
    out = []
    if not 0 < c.s < 0.5:
        out.append(f"s < 1/2 and s > 0 required: s={c.s!r}")
    if not 0 < c.tau2 < c.tau1 < 1:
        out.append(f"0 < tau2 < tau1 < 1 required: tau1={c.tau1!r}, tau2={c.tau2!r}")
    if 0 < c.s < 0.5:
        a_max = 1.0 / (1.0 - 2.0 * c.s)
        if not 0 < c.a <= a_max:
            out.append(f"a <= 1/(1-2s)={a_max!r} and a > 0 required: a={c.a!r}")
    elif c.a <= 0:
        out.append(f"a > 0 required: a={c.a!r}")
    if lambdaN <= 0:
        out.append(f"lambdaN > 0 required: lambdaN={lambdaN!r}")
    elif not 0 < c.b <= 1.0 / lambdaN:
        out.append(f"b <= 1/lambdaN={1.0 / lambdaN!r} and b > 0 required: b={c.b!r}")
    if not lambda2 > 0:
        out.append(f"connected graph (lambda2 > 0) required: lambda2={lambda2!r}")
    if not c.eta >= 0:
        out.append(f"eta >= 0 required: eta={c.eta!r}")
    if c.n_agents < 1:
        out.append(f"n_agents >= 1 required: n_agents={c.n_agents!r}")
    return out


def alpha(config: ScheduleConfig, t: int) -> float:
    return config.a / (t + 1) ** config.tau1


def beta(config: ScheduleConfig, t: int) -> float:
    return config.b / (t + 1) ** config.tau2


@dataclass(frozen=True)
class GammaState:
    gamma1: float
    gamma2: float
    t: int = 0


def initial_gamma(config: ScheduleConfig) -> GammaState:
    return GammaState(0.0, float(config.eta), 0)


def gamma_advance(state: GammaState, config: ScheduleConfig, lambda2: float) -> GammaState:
    """One step of the threshold recursion.

    gamma1 tracks the admissible consensus deviation and gamma2 the admissible
    error of the network average.
    """
    t = state.t
    al = alpha(config, t)
    be = beta(config, t)
    g1, g2 = state.gamma1, state.gamma2
    n1 = (1.0 - be * lambda2 + config.kappa1 * al) * g1 + config.kappa2 * al * g2
    n2 = (1.0 - (1.0 - 2.0 * config.s) * al) * g2 + al * g1
    if not (math.isfinite(n1) and math.isfinite(n2)):
        raise DivergenceError(f"threshold recursion overflowed at t={t + 1}: gamma1={n1!r}, gamma2={n2!r}")
    if n1 < 0 or n2 < 0:
        raise InvariantViolation(
            f"threshold recursion left the nonnegative orthant at t={t + 1}: "
            f"gamma1={n1!r}, gamma2={n2!r}"
        )
    return GammaState(n1, n2, t + 1)


def gamma_total(state: GammaState) -> float:
    return state.gamma1 + state.gamma2
