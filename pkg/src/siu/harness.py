"""Experiment runner: config, graph provisioning, main loop and metrics output."""
from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path

import numpy as np
import yaml

from . import schedule as sch
from .attack import AttackPlan, measure, sample_ball
from .errors import ConfigError, DivergenceError, ValidationError
from .estimator import EstimatorState, diagnostics, saturation_gains, siu_step
from .graph import Graph, is_connected, laplacian, random_geometric, read_edgelist, spectral_bounds, write_edgelist

log = logging.getLogger(__name__)

CSV_HEADER = ["t", "max_err", "mean_err", "V", "W", "gamma1", "gamma2", "gamma_total", "inv_v", "inv_w", "inv_err"]
MAX_GRAPH_RETRIES = 1000


@dataclass(frozen=True)
class GraphSpec:
    n: int = 300
    radius: float = 0.12
    seed: int = 0
    path: str | None = None


@dataclass(frozen=True)
class ThetaSpec:
    value: tuple[float, ...] | None = None
    dim: int = 3
    seed: int = 0


@dataclass(frozen=True)
class ExperimentConfig:
    graph: GraphSpec = field(default_factory=GraphSpec)
    a: float = sch.DEFAULT_STEPS["a"]
    b: float = sch.DEFAULT_STEPS["b"]
    tau1: float = sch.DEFAULT_STEPS["tau1"]
    tau2: float = sch.DEFAULT_STEPS["tau2"]
    s: float = 0.201
    eta: float = 100.0
    attack: AttackPlan = field(default_factory=AttackPlan)
    theta: ThetaSpec = field(default_factory=ThetaSpec)
    iterations: int = 500_000
    log_stride: int = 500
    output: str | None = None
    override_validation: bool = False

    def __post_init__(self):
        if self.iterations < 1:
            raise ConfigError("iterations must be >= 1")
        if self.log_stride < 1:
            raise ConfigError("log_stride must be >= 1")

    def schedule(self, n_agents: int) -> sch.ScheduleConfig:
        return sch.ScheduleConfig(self.a, self.b, self.tau1, self.tau2, self.s, self.eta, n_agents)

    def to_flat(self) -> dict:
        """Flat dotted-key view; the inverse of :func:`config_from_mapping`."""
        out = {}
        for f in fields(self):
            val = getattr(self, f.name)
            if f.name in ("graph", "attack", "theta"):
                for k, v in asdict(val).items():
                    out[f"{f.name}.{k}"] = list(v) if isinstance(v, tuple) else v
            else:
                out[f.name] = val
        return out


_SECTIONS = {"graph": GraphSpec, "attack": AttackPlan, "theta": ThetaSpec}
_TOP = {f.name for f in fields(ExperimentConfig)} - set(_SECTIONS)


def _flatten(d: dict, prefix: str = "") -> dict:
    out = {}
    for k, v in d.items():
        key = f"{prefix}{k}"
        if isinstance(v, dict):
            out.update(_flatten(v, key + "."))
        else:
            out[key] = v
    return out


def _coerce(typ, raw, key):
    if raw is None:
        return None
    try:
        if typ is bool:
            if isinstance(raw, str):
                return raw.strip().lower() in ("1", "true", "yes", "on")
            return bool(raw)
        if typ is int:
            return int(raw)
        if typ is float:
            return float(raw)
        if typ is tuple:
            if isinstance(raw, str):
                raw = yaml.safe_load(raw)
            return tuple(float(x) for x in raw)
        return str(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {raw!r} ({exc})") from None


_TYPES = {
    "graph.n": int, "graph.radius": float, "graph.seed": int, "graph.path": str,
    "attack.size": int, "attack.mode": str, "attack.strategy": str, "attack.seed": int,
    "attack.offset": tuple, "attack.magnitude": float,
    "theta.value": tuple, "theta.dim": int, "theta.seed": int,
    "a": float, "b": float, "tau1": float, "tau2": float, "s": float, "eta": float,
    "iterations": int, "log_stride": int, "output": str, "override_validation": bool,
}


def config_from_mapping(mapping: dict, base: ExperimentConfig | None = None) -> ExperimentConfig:
    """Build a config from nested or dotted keys, on top of ``base``.

    ``schedule.a`` is accepted as an alias of ``a``; a bare list under
    ``theta`` is the explicit parameter vector.
    """
    flat = _flatten(mapping)
    if "theta" in flat:
        flat["theta.value"] = flat.pop("theta")
    for k in list(flat):
        if k.startswith("schedule."):
            flat[k.split(".", 1)[1]] = flat.pop(k)
    unknown = sorted(set(flat) - set(_TYPES))
    if unknown:
        raise ConfigError(f"unknown config keys: {unknown}")
    cfg = base or ExperimentConfig()
    sections = {name: {} for name in _SECTIONS}
    top = {}
    for k, raw in flat.items():
        val = _coerce(_TYPES[k], raw, k)
        if "." in k:
            sec, sub = k.split(".", 1)
            sections[sec][sub] = val
        else:
            top[k] = val
    for name, upd in sections.items():
        if upd:
            top[name] = replace(getattr(cfg, name), **upd)
    return replace(cfg, **top)


def load_config(path: str | Path, overrides: dict | None = None) -> ExperimentConfig:
    """Read a YAML (or JSON) config file; ``overrides`` take precedence."""
    data = yaml.safe_load(Path(path).read_text(encoding="utf-8")) or {}
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    cfg = config_from_mapping(data)
    return config_from_mapping(overrides, cfg) if overrides else cfg


def sample_theta(dim: int, eta: float, seed: int) -> np.ndarray:
    """Uniform draw from the closed l2 ball of radius ``eta`` in ``dim`` dimensions."""
    return sample_ball(np.random.default_rng(seed), dim, eta)


def provision_graph(spec: GraphSpec, max_retries: int = MAX_GRAPH_RETRIES) -> tuple[Graph, int]:
    """Connected graph from an edge list or by regenerating with seed, seed+1, ...

    Returns the graph and the seed that produced it (``-1`` for files).
    """
    if spec.path:
        g = read_edgelist(spec.path)
        if not is_connected(g):
            raise ConfigError(f"graph in {spec.path} is not connected")
        return g, -1
    for k in range(max_retries + 1):
        g = random_geometric(spec.n, spec.radius, spec.seed + k)
        if is_connected(g):
            if k:
                log.info("graph connected after %d regenerations (seed %d)", k, spec.seed + k)
            return g, spec.seed + k
    raise ConfigError(
        f"no connected graph with n={spec.n}, radius={spec.radius} after {max_retries} retries"
    )


def resolve_theta(cfg: ExperimentConfig) -> np.ndarray:
    if cfg.theta.value is not None:
        theta = np.asarray(cfg.theta.value, dtype=np.float64)
    else:
        theta = sample_theta(cfg.theta.dim, cfg.eta, cfg.theta.seed)
    if np.linalg.norm(theta) > cfg.eta:
        raise ConfigError(f"||theta*|| = {np.linalg.norm(theta)!r} exceeds eta = {cfg.eta!r}")
    return theta


@dataclass(frozen=True)
class MetricsRow:
    t: int
    max_err: float
    mean_err: float
    V: float
    W: float
    gamma1: float
    gamma2: float
    gamma_total: float
    inv_v: bool
    inv_w: bool
    inv_err: bool

    def csv_fields(self) -> list[str]:
        vals = [self.max_err, self.mean_err, self.V, self.W, self.gamma1, self.gamma2, self.gamma_total]
        return [str(self.t)] + [repr(float(v)) for v in vals] + [str(int(b)) for b in (self.inv_v, self.inv_w, self.inv_err)]


@dataclass
class RunSummary:
    final_max_err: float
    final_gamma: float
    iterations: int
    n_agents: int
    lambda2: float
    lambdaN: float
    graph_seed: int
    theta: list
    max_attacked: int
    condition_holds: bool
    invariants_ok: bool
    unattacked_gains_ok: bool
    rate_slope: float | None
    rate_target: float
    violations: list
    rows: list = field(default_factory=list, repr=False)

    @property
    def invariant_violation(self) -> bool:
        return self.condition_holds and not self.invariants_ok

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("rows")
        d["invariant_violation"] = self.invariant_violation
        return d


def tail_slope(rows: list[MetricsRow], frac: float = 0.5) -> float | None:
    """Least-squares slope of log(max_err) against log(t+1) over the last ``frac`` of rows."""
    if not rows:
        return None
    T = rows[-1].t
    pts = [(r.t, r.max_err) for r in rows if r.t >= (1 - frac) * T and r.max_err > 0]
    if len(pts) < 2:
        return None
    t, e = np.array(pts, dtype=np.float64).T
    return float(np.polyfit(np.log(t + 1.0), np.log(e), 1)[0])


def run(cfg: ExperimentConfig) -> RunSummary:
    """Run the saturated-innovation estimator for ``cfg.iterations`` steps.

    Metrics rows are produced at t=0, every ``log_stride`` steps and at t=T.
    If ``cfg.output`` is set, the metrics CSV, realized edge list, resolved
    config and summary are written there.
    """
    g, graph_seed = provision_graph(cfg.graph)
    spectrum = spectral_bounds(laplacian(g))
    sc = cfg.schedule(g.n)
    violations = sch.validate(sc, spectrum.lambdaN, spectrum.lambda2)
    if violations:
        if not cfg.override_validation:
            raise ValidationError(violations)
        log.warning("running outside validated parameter range: %s", "; ".join(violations))
    theta = resolve_theta(cfg)
    N, M = g.n, theta.size
    plan = cfg.attack
    if plan.size >= N:
        raise ConfigError(f"attack.size={plan.size} must be < number of agents {N}")

    for k, v in cfg.to_flat().items():
        if isinstance(v, float):
            log.debug("config %s = %.17g", k, v)

    out = Path(cfg.output) if cfg.output else None
    writer = fh = None
    if out is not None:
        out.mkdir(parents=True, exist_ok=True)
        write_edgelist(g, out / "graph.edgelist")
        resolved = dict(cfg.to_flat(), **{
            "graph.realized_seed": graph_seed,
            "lambda2": spectrum.lambda2,
            "lambdaN": spectrum.lambdaN,
            "theta.realized": theta.tolist(),
        })
        (out / "config.json").write_text(json.dumps(resolved, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        fh = open(out / "metrics.csv", "w", newline="", encoding="utf-8")
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_HEADER)

    static_meas = plan.mode == "fixed" and plan.strategy != "random-bounded"
    meas = measure(theta, plan, 0, N) if static_meas else None
    state = EstimatorState.zeros(N, M)
    gs = sch.initial_gamma(sc)
    rows: list[MetricsRow] = []
    max_attacked = 0
    gains_ok = True

    def record(state, gs, meas):
        nonlocal gains_ok
        gamma = sch.gamma_total(gs)
        gains = saturation_gains(meas.values, state.x, gamma) if meas is not None else None
        d = diagnostics(state, theta, gs, gains)
        if gains is not None and not np.all(gains[~meas.attacked] == 1.0):
            gains_ok = False
        row = MetricsRow(d.t, d.max_err, d.mean_err, d.V, d.W, d.gamma1, d.gamma2, gamma, d.inv_v, d.inv_w, d.inv_err)
        rows.append(row)
        if writer is not None:
            writer.writerow(row.csv_fields())

    try:
        T = cfg.iterations
        for t in range(T):
            if not static_meas:
                meas = measure(theta, plan, t, N)
            max_attacked = max(max_attacked, meas.n_attacked)
            if t % cfg.log_stride == 0:
                record(state, gs, meas)
            state = siu_step(state, g, meas, sch.alpha(sc, t), sch.beta(sc, t), sch.gamma_total(gs))
            gs = sch.gamma_advance(gs, sc, spectrum.lambda2)
        final_meas = meas if static_meas else measure(theta, plan, T, N)
        record(state, gs, final_meas)
    finally:
        if fh is not None:
            fh.close()
    if not np.all(np.isfinite(state.x)):
        raise DivergenceError("non-finite estimator state at the end of the run")

    condition = max_attacked / N < cfg.s
    summary = RunSummary(
        final_max_err=rows[-1].max_err,
        final_gamma=rows[-1].gamma_total,
        iterations=cfg.iterations,
        n_agents=N,
        lambda2=spectrum.lambda2,
        lambdaN=spectrum.lambdaN,
        graph_seed=graph_seed,
        theta=theta.tolist(),
        max_attacked=max_attacked,
        condition_holds=condition,
        invariants_ok=all(r.inv_v and r.inv_w and r.inv_err for r in rows),
        unattacked_gains_ok=gains_ok,
        rate_slope=tail_slope(rows),
        rate_target=-(cfg.tau1 - cfg.tau2),
        violations=violations,
        rows=rows,
    )
    if out is not None:
        (out / "summary.json").write_text(json.dumps(summary.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return summary


def sweep_resilience(base: ExperimentConfig, s_values, T: int | None = None) -> list[tuple[float, float]]:
    """Threshold gamma_T for each resilience index, by evolving only the recursion.

    Invalid ``s`` values are skipped with a warning.
    """
    T = base.iterations if T is None else T
    g, _ = provision_graph(base.graph)
    spectrum = spectral_bounds(laplacian(g))
    table = []
    for s in sorted(float(x) for x in s_values):
        sc = replace(base, s=s).schedule(g.n)
        bad = sch.validate(sc, spectrum.lambdaN, spectrum.lambda2)
        if bad and not base.override_validation:
            log.warning("skipping s=%r: %s", s, "; ".join(bad))
            continue
        gs = sch.initial_gamma(sc)
        for _ in range(T):
            gs = sch.gamma_advance(gs, sc, spectrum.lambda2)
        gT = sch.gamma_total(gs)
        if not math.isfinite(gT):
            raise DivergenceError(f"threshold recursion diverged for s={s!r}")
        table.append((s, gT))
    return table
