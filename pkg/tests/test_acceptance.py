"""End-to-end acceptance checks, one test per criterion.

Each test records a PASS/FAIL line that the terminal summary prints at the end
of the session. The N=300 runs take a few minutes; deselect with ``-m "not slow"``.
"""
import itertools
import math
import time

import numpy as np
import pytest

from siu.graph import Graph, is_connected, laplacian, random_geometric, spectral_bounds
from siu.harness import config_from_mapping, provision_graph, run, sweep_resilience
from siu.lemma_lab import (
    ScalarSystemConfig,
    decay_rate_check,
    gamma_mapping,
    random_config,
    simulate_basic,
    simulate_coupled,
    simulate_modified,
    trajectory_from_series,
)
from siu.schedule import ScheduleConfig, gamma_advance, initial_gamma

ETA = 100.0
T_LONG = 500_000


# --- 1. invariant suite --------------------------------------------------

def _invariant_configs():
    radius = {20: 0.5, 50: 0.35}
    cases = []
    combos = itertools.product((20, 50), (0.2, 0.4), ("fixed", "time-varying"), ("negation", "random-bounded"))
    for k, (n, s, mode, strat) in enumerate(combos):
        cases.append((n, s, mode, strat, k))
    # four extra seeds on the harder (larger s) settings
    for k, (n, mode) in enumerate(itertools.product((20, 50), ("fixed", "time-varying"))):
        cases.append((n, 0.4, mode, "negation", 100 + k))
    out = []
    for n, s, mode, strat, seed in cases:
        g, gseed = provision_graph(config_from_mapping({"graph": {"n": n, "radius": radius[n], "seed": seed}}).graph)
        spectrum = spectral_bounds(laplacian(g))
        b = 0.9 / spectrum.lambdaN
        kappa1 = 1 + math.sqrt(n)
        a = min(1 / (1 - 2 * s), 0.25 * b * spectrum.lambda2 / kappa1)
        size = math.ceil(s * n) - 1
        out.append(config_from_mapping({
            "graph": {"n": n, "radius": radius[n], "seed": gseed},
            "a": a, "b": b, "tau1": 0.3, "tau2": 0.05, "s": s, "eta": 10.0,
            "attack": {"size": size, "mode": mode, "strategy": strat, "seed": seed, "magnitude": 50.0},
            "theta": {"dim": 3, "seed": seed},
            "iterations": 20_000, "log_stride": 1,
        }))
    return out


def test_criterion1_invariants_hold(report):
    cfgs = _invariant_configs()
    assert len(cfgs) == 20
    start = time.perf_counter()
    bad = []
    for cfg in cfgs:
        summ = run(cfg)
        assert summ.condition_holds
        n_bad = sum(not (r.inv_v and r.inv_w and r.inv_err) for r in summ.rows)
        if n_bad:
            bad.append((cfg.graph.n, cfg.s, cfg.attack.mode, cfg.attack.strategy, n_bad))
    elapsed = time.perf_counter() - start
    ok = not bad
    report(1, ok, f"20 runs, violations={bad or 0}, {elapsed:.0f}s (target < 60s)")
    assert ok


# --- 2/3. convergence on the 300-agent network ---------------------------

def _net300_cfg(s, size):
    return config_from_mapping({
        "graph": {"n": 300, "radius": 0.12, "seed": 0},
        "s": s, "eta": ETA,
        "attack": {"size": size, "mode": "fixed", "strategy": "negation", "seed": 0},
        "theta": {"dim": 3, "seed": 0},
        "iterations": T_LONG, "log_stride": 500,
    })


@pytest.fixture(scope="module")
def net300_runs():
    return {s: run(_net300_cfg(s, size)) for s, size in ((0.201, 60), (0.401, 120))}


def _err_at(summ, t):
    return next(r.max_err for r in summ.rows if r.t == t)


@pytest.mark.slow
def test_criterion2_convergence(report, net300_runs):
    parts = []
    ok = True
    for s, summ in net300_runs.items():
        final = summ.final_max_err
        ratio = final / _err_at(summ, T_LONG // 10)
        arm = final <= 0.05 * ETA and ratio <= 0.1
        ok &= arm
        parts.append(f"s={s}: final={final:.3g} (<= {0.05 * ETA}), ratio={ratio:.3g} (<= 0.1)")
    order = net300_runs[0.201].final_max_err <= net300_runs[0.401].final_max_err
    ok &= order
    parts.append(f"ordering={'ok' if order else 'broken'}")
    report(2, ok, "; ".join(parts))
    assert ok


@pytest.mark.slow
def test_criterion3_rate(report, net300_runs):
    tau0 = 0.5 * (0.15 - 0.001)
    res = {}
    for s, summ in net300_runs.items():
        tr = trajectory_from_series([r.t for r in summ.rows], [r.max_err for r in summ.rows], T_LONG)
        res[s] = decay_rate_check(tr, tau0, tail_fraction=0.5, shrink_factor=0.9)
    ok = all(res.values())
    report(3, ok, f"tau0={tau0:.4f}: " + ", ".join(f"s={s}: {v}" for s, v in res.items()))
    assert ok


# --- 4. resilience trade-off ---------------------------------------------

@pytest.mark.slow
def test_criterion4_gamma_monotone_in_s(report):
    base = _net300_cfg(0.201, 0)
    table = sweep_resilience(base, np.linspace(0.05, 0.45, 10), T=T_LONG)
    g = [x for _, x in table]
    ok = len(g) == 10 and all(b >= a for a, b in zip(g, g[1:]))
    report(4, ok, "gamma_T=" + ", ".join(f"{x:.3g}" for x in g))
    assert ok


# --- 5. lemma oracles ----------------------------------------------------

@pytest.mark.slow
def test_criterion5_lemma_oracles(report):
    detail = []
    basic_cfg = ScalarSystemConfig(c1=0.8, c2=0.4, delta1=0.35, delta2=0.35, v0=3.0)
    tr = simulate_basic(basic_cfg, 10**5)
    bounded = math.isfinite(tr.sup_v) and tr.sup_v <= max(abs(basic_cfg.v0), basic_cfg.c1 / basic_cfg.c2) + basic_cfg.c1
    detail.append(f"basic sup={tr.sup_v:.3g}")

    rng = np.random.default_rng(2024)
    counts = {}
    for name, sim in (("modified", simulate_modified), ("coupled", simulate_coupled)):
        good = 0
        for _ in range(10):
            cfg = random_config(rng)
            traj = sim(cfg, 10**6)
            gap = cfg.delta1 - cfg.delta2
            if decay_rate_check(traj, 0.9 * gap) and not decay_rate_check(traj, 1.5 * gap):
                good += 1
        counts[name] = good
        detail.append(f"{name} {good}/10")

    sc = ScheduleConfig(a=1.54e-4, b=3.78e-2, tau1=0.15, tau2=0.001, s=0.201, eta=ETA, n_agents=300)
    lam2 = 0.12
    gs = initial_gamma(sc)
    coupled = simulate_coupled(gamma_mapping(0.201, lam2, 300, sc.a, sc.b, sc.tau1, sc.tau2, ETA), 10**4, dense_until=10**4)
    same = True
    for t in range(1, 10**4 + 1):
        gs = gamma_advance(gs, sc, lam2)
        same &= gs.gamma2 == coupled.v[t] and gs.gamma1 == coupled.w[t]
    detail.append(f"gamma==coupled bitwise: {same}")

    ok = bounded and same and counts["modified"] == 10 and counts["coupled"] == 10
    report(5, ok, "; ".join(detail))
    assert ok


# --- 6. spectral correctness ---------------------------------------------

def test_criterion6_spectral(report):
    p3 = spectral_bounds(laplacian(Graph(3, ((0, 1), (1, 2)))))
    k4 = spectral_bounds(laplacian(Graph(4, tuple(itertools.combinations(range(4), 2)))))
    exact = (abs(p3.lambda2 - 1) <= 1e-9 and abs(p3.lambdaN - 3) <= 1e-9
             and abs(k4.lambda2 - 4) <= 1e-9 and abs(k4.lambdaN - 4) <= 1e-9)
    rng = np.random.default_rng(6)
    agree = 0
    n_conn = 0
    for seed in range(100):
        n = int(rng.integers(2, 21))
        g = random_geometric(n, float(rng.uniform(0.15, 0.7)), seed)
        conn = is_connected(g)
        n_conn += conn
        agree += conn == (spectral_bounds(laplacian(g)).lambda2 > 1e-9)
    ok = exact and agree == 100
    report(6, ok, f"P3=({p3.lambda2:.12g},{p3.lambdaN:.12g}) K4=({k4.lambda2:.12g},{k4.lambdaN:.12g}); "
                  f"connectivity agreement {agree}/100 ({n_conn} connected)")
    assert ok


# --- 7. determinism ------------------------------------------------------

def test_criterion7_byte_identical_csv(report, tmp_path):
    base = _invariant_configs()
    picks = [base[3], base[6], base[-1]]
    same = []
    for i, cfg in enumerate(picks):
        cfg = config_from_mapping({"iterations": 3000, "log_stride": 7}, cfg)
        blobs = []
        for rep in "ab":
            out = tmp_path / f"{i}{rep}"
            run(config_from_mapping({"output": str(out)}, cfg))
            blobs.append((out / "metrics.csv").read_bytes())
        same.append(blobs[0] == blobs[1])
    ok = all(same)
    report(7, ok, f"{sum(same)}/{len(same)} configurations byte-identical")
    assert ok
