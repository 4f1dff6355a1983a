"""Command line entry point: ``siu {run,sweep,lemma,graph}``."""
from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from . import harness, lemma_lab
from .errors import InconclusiveError, SIUError
from .graph import is_connected, laplacian, random_geometric, read_edgelist, spectral_bounds, write_edgelist

log = logging.getLogger("siu")


def _parse_set(items):
    out = {}
    for item in items or ():
        if "=" not in item:
            raise SystemExit(f"--set expects key=value, got {item!r}")
        k, v = item.split("=", 1)
        out[k.strip()] = v.strip()
    return out


def _experiment_config(args) -> harness.ExperimentConfig:
    overrides = _parse_set(args.set)
    for flag, key in (("iterations", "iterations"), ("output", "output"), ("log_stride", "log_stride"), ("seed", "graph.seed")):
        val = getattr(args, flag, None)
        if val is not None:
            overrides[key] = val
    if getattr(args, "override_validation", False):
        overrides["override_validation"] = True
    if args.config:
        return harness.load_config(args.config, overrides)
    return harness.config_from_mapping(overrides)


def cmd_run(args) -> int:
    cfg = _experiment_config(args)
    summary = harness.run(cfg)
    print(
        f"final max_err={summary.final_max_err:.6g} gamma={summary.final_gamma:.6g} "
        f"invariants_ok={summary.invariants_ok} condition_holds={summary.condition_holds} "
        f"rate_slope={summary.rate_slope} (target {summary.rate_target:.4g})"
    )
    if summary.invariant_violation:
        log.error("proof invariants violated although |A_t|/N < s held")
        return 3
    return 0


def _grid(spec: str) -> list[float]:
    lo, hi, k = spec.split(":")
    return np.linspace(float(lo), float(hi), int(k)).tolist()


def cmd_sweep(args) -> int:
    cfg = _experiment_config(args)
    s_values = list(args.s or []) + (_grid(args.s_grid) if args.s_grid else [])
    if not s_values:
        s_values = _grid("0.05:0.45:10")
    table = harness.sweep_resilience(cfg, s_values, args.iterations)
    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["s", "gamma_T"])
    for s, g in table:
        w.writerow([repr(s), repr(g)])
    return 0


_SIMS = {
    "basic": lemma_lab.simulate_basic,
    "modified": lemma_lab.simulate_modified,
    "coupled": lemma_lab.simulate_coupled,
}


def cmd_lemma(args) -> int:
    keys = ("c1", "c2", "delta1", "delta2", "c3", "c4", "c5", "c6", "c7", "v0", "w0")
    cfg = lemma_lab.ScalarSystemConfig(**{k: getattr(args, k) for k in keys})
    traj = _SIMS[args.system](cfg, args.T)
    if args.csv:
        traj.to_csv(args.csv)
    print(f"sup|v|={traj.sup_v:.6g}" + ("" if traj.sup_w is None else f" sup|w|={traj.sup_w:.6g}"))
    if args.system == "basic":
        print(f"final v={traj.v[-1]!r}")
        return 0
    gap = cfg.delta1 - cfg.delta2
    ok = True
    for frac in args.delta0_fractions:
        try:
            passed = lemma_lab.decay_rate_check(traj, frac * gap, args.tail_fraction, args.shrink)
        except InconclusiveError as exc:
            print(f"delta0={frac}*gap: inconclusive ({exc})")
            ok = False
            continue
        print(f"delta0={frac:g}*gap={frac * gap:.4g}: decay check {'passes' if passed else 'fails'}")
    return 0 if ok else 1


def cmd_graph(args) -> int:
    if args.action == "generate":
        g = random_geometric(args.n, args.radius, args.seed)
        write_edgelist(g, args.out)
        print(f"wrote {args.out}: n={g.n} edges={len(g.edges)} connected={is_connected(g)}")
        return 0
    g = read_edgelist(args.path)
    conn = is_connected(g)
    line = f"n={g.n} edges={len(g.edges)} max_degree={g.max_degree} connected={conn}"
    if g.n >= 2:
        spectrum = spectral_bounds(laplacian(g))
        line += f" lambda2={spectrum.lambda2:.17g} lambdaN={spectrum.lambdaN:.17g} b_max={1 / spectrum.lambdaN if spectrum.lambdaN else float('inf'):.6g}"
    print(line)
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="siu", description="Resilient distributed estimation under sensor attacks")
    p.add_argument("-v", "--verbose", action="count", default=0)
    sub = p.add_subparsers(dest="command", required=True)

    def experiment_args(sp):
        sp.add_argument("--config", help="YAML/JSON config file")
        sp.add_argument("--set", action="append", metavar="KEY=VALUE", help="override a config key, e.g. attack.size=60")
        sp.add_argument("--iterations", type=int)
        sp.add_argument("--seed", type=int, help="graph seed")
        sp.add_argument("--override-validation", action="store_true")

    r = sub.add_parser("run", help="run the estimator and write metrics")
    experiment_args(r)
    r.add_argument("--output", help="output directory")
    r.add_argument("--log-stride", dest="log_stride", type=int)
    r.set_defaults(func=cmd_run)

    s = sub.add_parser("sweep", help="threshold gamma_T versus resilience index s")
    experiment_args(s)
    s.add_argument("--s", type=float, nargs="+")
    s.add_argument("--s-grid", help="lo:hi:count")
    s.set_defaults(func=cmd_sweep)

    lm = sub.add_parser("lemma", help="simulate a scalar/coupled recursion and check decay")
    lm.add_argument("system", choices=sorted(_SIMS))
    lm.add_argument("--T", type=int, default=10**6)
    for k, d in (("c1", 1.0), ("c2", 1.0), ("delta1", 0.8), ("delta2", 0.2), ("c3", 1.0), ("c4", 1.0),
                 ("c5", 1.0), ("c6", 1.0), ("c7", 1.0), ("v0", 1.0), ("w0", 1.0)):
        lm.add_argument(f"--{k}", type=float, default=d)
    lm.add_argument("--delta0-fractions", type=float, nargs="+", default=[0.9, 1.5])
    lm.add_argument("--tail-fraction", type=float, default=0.5)
    lm.add_argument("--shrink", type=float, default=0.9)
    lm.add_argument("--csv", help="write trajectory CSV (t,v,w)")
    lm.set_defaults(func=cmd_lemma)

    gp = sub.add_parser("graph", help="generate or inspect communication graphs")
    gsub = gp.add_subparsers(dest="action", required=True)
    gg = gsub.add_parser("generate")
    gg.add_argument("--n", type=int, default=300)
    gg.add_argument("--radius", type=float, default=0.12)
    gg.add_argument("--seed", type=int, default=0)
    gg.add_argument("--out", required=True)
    gi = gsub.add_parser("inspect")
    gi.add_argument("path")
    gp.set_defaults(func=cmd_graph)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * args.verbose, format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except SIUError as exc:
        log.error("%s", exc)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
