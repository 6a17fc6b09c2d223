"""Command-line driver.

Exit codes: 0 success, 1 invalid input or failed validation, 2 runtime failure
(density left the invariant region). Flags override the matching scenario fields.
"""
from __future__ import annotations

import argparse
import csv
import logging
import sys

import numpy as np

from .local import riemann_limit_1to1
from .measures import l1_distance
from .network import ConfigurationError, DomainError, validate_network
from .runner import run_and_measure, run_scenario
from .scenario import MODELS, ScenarioConfig, build_network, builtin_diamond, load_scenario, model_family, model_kind, write_results
from .scheme import SimulationError
from .stress import max_principle_sweep

log = logging.getLogger("nonlocal_networks")

EXIT_OK, EXIT_INVALID, EXIT_RUNTIME = 0, 1, 2
SWEEP_HEADER = ["eta", "model", "outflow", "total_travel_time", "congestion"]


def _add_scenario_args(p, model=True):
    src = p.add_mutually_exclusive_group(required=True)
    src.add_argument("scenario", nargs="?", help="scenario JSON file")
    src.add_argument("--builtin", choices=["diamond"], help="use a built-in scenario")
    p.add_argument("--eta", type=float)
    if model:
        p.add_argument("--model", choices=MODELS)
    p.add_argument("--T", type=float)
    p.add_argument("--dx", type=float)
    p.add_argument("--cfl", choices=["strict", "relaxed", "adaptive"])


def _load(args, **extra) -> ScenarioConfig:
    cfg = builtin_diamond() if args.builtin else load_scenario(args.scenario)
    kw = {k: getattr(args, k, None) for k in ("eta", "model", "T", "dx", "cfl")}
    kw.update(extra)
    return cfg.with_overrides(**kw)


def cmd_simulate(args) -> int:
    cfg = _load(args, out=args.out)
    snaps = args.snapshots if args.snapshots is not None else None
    traj, report = run_and_measure(cfg, snaps)
    out_dir = args.out or cfg.outputs.get("dir") or "results"
    paths = write_results(traj, report, out_dir, report.ratios)
    print(f"model={cfg.model} eta={cfg.kernel['eta']:g} T={cfg.horizon['T']:g} steps={traj.n_steps}")
    for name in ("outflow", "total_travel_time", "congestion"):
        print(f"{name:>18s} {report.scalars()[name]:.6g}")
    print(f"wrote {len(paths['snapshots'])} snapshot file(s), {paths['measures']}, {paths['ratios']}")
    return EXIT_OK


def _sweep_row(cfg):
    _, rep = run_and_measure(cfg)
    eta = cfg.kernel["eta"] if model_kind(cfg.model) == "nonlocal" else "local"
    return [eta, cfg.model, rep.outflow, rep.total_travel_time, rep.congestion]


def cmd_sweep_eta(args) -> int:
    base = _load(args)
    family = model_family(base.model)
    cfgs = [base.with_overrides(eta=eta, model=f"nonlocal-{family}") for eta in args.etas]
    if cfgs and not args.no_local:
        cfgs.append(base.with_overrides(model=f"local-{family}"))
    if args.jobs > 1 and len(cfgs) > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            rows = list(pool.map(_sweep_row, cfgs))
    else:
        rows = [_sweep_row(c) for c in cfgs]
    fh = open(args.out, "w", newline="") if args.out else sys.stdout
    try:
        w = csv.writer(fh)
        w.writerow(SWEEP_HEADER)
        for row in rows:
            w.writerow([row[0], row[1]] + [f"{v:.6g}" for v in row[2:]])
    finally:
        if args.out:
            fh.close()
    return EXIT_OK


def cmd_compare(args) -> int:
    cfg = _load(args)
    a = run_scenario(cfg.with_overrides(model=args.model_a))
    b = run_scenario(cfg.with_overrides(model=args.model_b))
    t = cfg.horizon["T"] if args.time is None else args.time
    w = csv.writer(sys.stdout)
    w.writerow(["road", "l1"])
    for e in a.road_ids:
        w.writerow([e, f"{l1_distance(a, b, e, t):.6g}"])
    return EXIT_OK


def cmd_riemann(args) -> int:
    if args.n < 1 or args.xmax <= args.xmin:
        raise ConfigurationError("need n >= 1 and xmax > xmin")
    if args.t < 0:
        raise ConfigurationError("t must be nonnegative")
    x = np.linspace(args.xmin, args.xmax, args.n)
    rho = riemann_limit_1to1(args.rho_L, args.rho_R, args.rho_max2, args.v2_0, args.t, x)
    w = csv.writer(sys.stdout)
    w.writerow(["x", "rho"])
    for xi, ri in zip(x, rho):
        w.writerow([repr(float(xi)), repr(float(ri))])
    return EXIT_OK


def cmd_validate(args) -> int:
    if args.random:
        failures = max_principle_sweep(args.random, args.seed)
        for i, coupling, mode, msg in failures:
            print(f"run {i} ({coupling}, {mode}): {msg}")
        print(f"{args.random} random scenarios, {len(failures)} bound violations")
        if failures:
            return EXIT_RUNTIME
        if not (args.scenario or args.builtin):
            return EXIT_OK
    if not (args.scenario or args.builtin):
        raise ConfigurationError("give a scenario file, --builtin or --random")
    cfg = _load(args)
    net = build_network(cfg)
    eta = cfg.kernel["eta"] if model_kind(cfg.model) == "nonlocal" else 0.0
    problems = validate_network(net, eta)
    for p in problems:
        print(p)
    print("ok" if not problems else f"{len(problems)} violation(s)")
    return EXIT_INVALID if problems else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="nonlocal-networks", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario and write CSV results")
    _add_scenario_args(p)
    p.add_argument("--out", help="output directory (default: scenario outputs.dir or ./results)")
    p.add_argument("--snapshots", type=float, nargs="*", help="snapshot times (default: from the scenario)")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep-eta", help="measures over a list of eta values plus the local baseline")
    _add_scenario_args(p)
    p.add_argument("--etas", type=float, nargs="*", default=[0.5, 0.25, 0.1, 0.05])
    p.add_argument("--no-local", action="store_true", help="skip the local baseline row")
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", help="CSV file (default: stdout)")
    p.set_defaults(func=cmd_sweep_eta)

    p = sub.add_parser("compare", help="per-road L1 distance between two models")
    _add_scenario_args(p, model=False)
    p.add_argument("--model-a", choices=MODELS, required=True)
    p.add_argument("--model-b", choices=MODELS, required=True)
    p.add_argument("--time", type=float, help="comparison time (default: T)")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("riemann", help="exact 1-to-1 limit Riemann solution as CSV")
    for name in ("rho_L", "rho_R", "rho_max2", "v2_0", "t"):
        p.add_argument(name, type=float)
    p.add_argument("--xmin", type=float, default=-1.0)
    p.add_argument("--xmax", type=float, default=1.0)
    p.add_argument("--n", type=int, default=201)
    p.set_defaults(func=cmd_riemann)

    p = sub.add_parser("validate", help="check a scenario against the modeling assumptions")
    p.add_argument("scenario", nargs="?")
    p.add_argument("--builtin", choices=["diamond"])
    p.add_argument("--eta", type=float)
    p.add_argument("--model", choices=MODELS)
    p.add_argument("--dx", type=float)
    p.add_argument("--random", type=int, default=0, metavar="N", help="also run N random maximum-principle checks")
    p.add_argument("--seed", type=int, default=0, help="seed for --random scenario generation")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (ConfigurationError, DomainError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except SimulationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
