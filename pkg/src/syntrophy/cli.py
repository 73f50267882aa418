"""Command-line interface.

Usage::

    syntrophy --config run.json [--out DIR] [--seed N] [--threads N] COMMAND ...

Commands are ``check``, ``analyze``, ``simulate``, ``sweep`` and ``basins``.
Exit codes: 0 success, 1 hypothesis failure, 2 input error, 3 ``D`` on a
threshold.
"""
from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from . import basins as basins_mod
from . import bifurcation, dynamics, equilibria, planar
from .errors import AtBifurcationError, ConfigError, HypothesisError, OutOfRegionError
from .growth import check_hypotheses, default_grid
from .io import csv_text, dumps, write_atomic
from .schema import (BRANCH_SCHEMA, HYPOTHESIS_SCHEMA, MANIFEST_SCHEMA, REGIME_SCHEMA,
                     load_config, validate)
from .svg import phase_portrait

EXIT_OK, EXIT_NEGATIVE, EXIT_INPUT, EXIT_BIFURCATION = 0, 1, 2, 3


class _Run:
    """Collects output files for the manifest."""

    def __init__(self, args):
        self.args = args
        self.out = Path(args.out) if args.out else None
        self.outputs = []

    def write(self, name, text):
        if self.out is None:
            return
        write_atomic(self.out / name, text)
        self.outputs.append(name)

    def write_json(self, name, doc, schema=None):
        if schema is not None:
            validate(doc, schema)
        self.write(name, dumps(doc))


def _floats(text, n, what):
    try:
        vals = [float(v) for v in text.split(",")]
    except ValueError:
        raise ConfigError(f"{what}: expected {n} comma-separated numbers, got {text!r}") from None
    if len(vals) != n:
        raise ConfigError(f"{what}: expected {n} comma-separated numbers, got {len(vals)}")
    return vals


def _resolution(text):
    parts = text.lower().split("x")
    try:
        vals = [int(p) for p in parts]
    except ValueError:
        raise ConfigError(f"--resolution: expected N or N1xN2, got {text!r}") from None
    if len(vals) == 1:
        vals = vals * 2
    if len(vals) != 2 or min(vals) < 1:
        raise ConfigError(f"--resolution: expected N or N1xN2, got {text!r}")
    return tuple(vals)


def _nullclines(model, config, D):
    return {w: planar.nullcline_polyline(model, config, w, D) for w in (1, 2)}


def cmd_check(run, model, config):
    report = check_hypotheses(model, default_grid(config))
    doc = report.to_dict()
    validate(doc, HYPOTHESIS_SCHEMA)
    run.write_json("hypotheses.json", doc)
    print(dumps(doc), end="")
    return EXIT_OK if report.passed else EXIT_NEGATIVE


def cmd_analyze(run, model, config):
    D = run.args.D if run.args.D is not None else config.D
    report = equilibria.classify_regime(model, config, D)
    doc = report.to_dict()
    validate(doc, REGIME_SCHEMA)
    run.write_json("regime.json", doc)
    nc = _nullclines(model, config, D)
    rows = [(a, b, f"gamma{w}") for w in (1, 2) for a, b in nc[w]]
    run.write("nullclines.csv", csv_text("x1,x2,branch", rows))
    print(dumps(doc), end="")
    return EXIT_OK


def cmd_simulate(run, model, config):
    a = run.args
    D = a.D if a.D is not None else config.D
    if (a.init is None) == (a.init_reduced is None):
        raise ConfigError("give exactly one of --init and --init-reduced")
    t_end = a.t_end if a.t_end is not None else dynamics.default_t_end(D)
    if not t_end > 0:
        raise ConfigError("--t-end must be positive")
    if a.samples < 2:
        raise ConfigError("--samples must be at least 2")
    t_eval = np.linspace(0.0, t_end, a.samples)
    if a.init is not None:
        y0 = _floats(a.init, 4, "--init")
        if min(y0) < 0:
            raise ConfigError("--init: components must be nonnegative")
        traj = dynamics.integrate_full(model, config, y0, t_end, D=D, t_eval=t_eval)
    else:
        y0 = _floats(a.init_reduced, 2, "--init-reduced")
        if min(y0) < 0:
            raise ConfigError("--init-reduced: components must be nonnegative")
        traj = dynamics.integrate_reduced(model, config, y0, t_end, D=D, t_eval=t_eval)
    eqs = equilibria.all_equilibria(model, config, D)
    summary = {
        "termination": traj.termination,
        "t_end": float(traj.times[-1]),
        "final": traj.final.tolist(),
        "attractor": dynamics.detect_attractor(traj, eqs),
    }
    if not traj.reduced:
        z1, z2 = dynamics.conservation_defect(config, traj)
        summary["conservation_defect"] = max(z1, z2)
        summary["omega_deviation_final"] = float(max(
            abs(traj.final[0] + traj.final[1] - config.s1_in),
            abs(traj.final[2] + traj.final[3] - traj.final[1] - config.s2_in)))
    rows = (np.column_stack([traj.times, traj.states]))
    run.write("trajectory.csv", csv_text(traj.header, rows))
    run.write_json("simulation.json", summary)
    print(dumps(summary), end="")
    return EXIT_OK


def cmd_sweep(run, model, config):
    a = run.args
    if not (0 < a.d_min < a.d_max):
        raise ConfigError("need 0 < --d-min < --d-max")
    diagram = bifurcation.sweep(model, config, a.d_min, a.d_max, a.samples)
    doc = diagram.to_dict()
    validate(doc, BRANCH_SCHEMA)
    run.write_json("branches.json", doc)
    run.write("branches.csv", csv_text("D,kind,x1,x2,stability", diagram.rows()))
    summary = {"events": doc["events"]}
    print(dumps(summary), end="")
    return EXIT_OK


def cmd_basins(run, model, config):
    a = run.args
    D = a.D if a.D is not None else config.D
    report = equilibria.classify_regime(model, config, D)
    eqs = list(report.equilibria)
    grid = basins_mod.classify_basins(model, config, D, _resolution(a.resolution),
                                      threads=a.threads, equilibria=eqs)
    run.write("basins.csv", csv_text("x1,x2,label", grid.rows()))
    stable = basins_mod.attractors(eqs)
    saddles = [e for e in eqs if e.kind == "F_star" and e.stability == "saddle"]
    sep = None
    summary = {"D": D, "labels": sorted(grid.label_set()),
               "unresolved_fraction": grid.fraction(basins_mod.UNRESOLVED),
               "fractions": {k: grid.fraction(k) for k in sorted(grid.label_set())}}
    if len(stable) >= 2 and saddles:
        sep = basins_mod.compute_separatrix(model, config, D, saddles[0])
        run.write("separatrix.csv", csv_text("x1,x2,branch", sep.rows()))
        probes = basins_mod.probe_separatrix(model, config, D, sep, eqs, seed=a.seed,
                                             threads=a.threads)
        summary["separatrix_probes"] = {
            "pairs": len(probes.labels_plus), "consistent": probes.consistent,
            "plus": sorted(set(probes.labels_plus)), "minus": sorted(set(probes.labels_minus))}
    if a.svg:
        run.write("basins.svg", phase_portrait(config, D, _nullclines(model, config, D), eqs, sep, grid))
    run.write_json("basins.json", summary)
    print(dumps(summary), end="")
    return EXIT_OK


COMMANDS = {"check": cmd_check, "analyze": cmd_analyze, "simulate": cmd_simulate,
            "sweep": cmd_sweep, "basins": cmd_basins}


def _global_flags(p, suppress):
    d = argparse.SUPPRESS if suppress else None
    p.add_argument("--config", default=d, help="JSON configuration file")
    p.add_argument("--out", default=d, metavar="DIR", help="directory for output files")
    p.add_argument("--seed", type=int, default=argparse.SUPPRESS if suppress else 0,
                   help="seed for random probe placement")
    p.add_argument("--threads", type=int, default=d, help="worker threads for basin grids")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="syntrophy", description=__doc__.split("\n")[0])
    p.add_argument("--version", action="version", version=__version__)
    _global_flags(p, False)
    sub = p.add_subparsers(dest="command", required=True)

    def add(name, help):
        sp = sub.add_parser(name, help=help)
        _global_flags(sp, True)
        return sp

    add("check", "check the growth hypotheses")
    sp = add("analyze", "thresholds, equilibria and regime at one dilution rate")
    sp.add_argument("--D", type=float)
    sp = add("simulate", "integrate the full or reduced system")
    sp.add_argument("--init", metavar="S1,X1,S2,X2")
    sp.add_argument("--init-reduced", metavar="X1,X2")
    sp.add_argument("--t-end", type=float)
    sp.add_argument("--samples", type=int, default=201)
    sp.add_argument("--D", type=float)
    sp = add("sweep", "bifurcation events over a range of dilution rates")
    sp.add_argument("--d-min", type=float, required=True)
    sp.add_argument("--d-max", type=float, required=True)
    sp.add_argument("--samples", type=int)
    sp = add("basins", "basins of attraction and separatrix")
    sp.add_argument("--D", type=float)
    sp.add_argument("--resolution", default="100")
    sp.add_argument("--svg", action="store_true")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be positive", file=sys.stderr)
        return EXIT_INPUT
    if not args.config:
        print("error: --config is required", file=sys.stderr)
        return EXIT_INPUT
    started = time.perf_counter()
    run = _Run(args)
    try:
        model, config = load_config(args.config)
        code = COMMANDS[args.command](run, model, config)
    except AtBifurcationError as exc:
        print(f"error: D is at threshold {exc.name} = {exc.value!r}", file=sys.stderr)
        return EXIT_BIFURCATION
    except HypothesisError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NEGATIVE
    except (ConfigError, OutOfRegionError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    if run.out is not None:
        params = {k: v for k, v in vars(args).items() if k != "command"}
        manifest = {
            "subcommand": args.command,
            "config": str(args.config),
            "parameters": {"growth": dict(zip(("m1", "K1", "L1", "m2", "K2", "L2"), model.params),
                                          family=model.family),
                           "D": config.D, "s1_in": config.s1_in, "s2_in": config.s2_in,
                           "flags": params},
            "outputs": sorted(run.outputs),
            "version": __version__,
            "duration_s": time.perf_counter() - started,
        }
        validate(manifest, MANIFEST_SCHEMA)
        write_atomic(run.out / "manifest.json", dumps(manifest))
    return code


if __name__ == "__main__":
    sys.exit(main())
