"""``jetflow`` command line: integrate, check, el-compare, connection.

Exit codes: 0 success, 1 invalid scenario or arguments, 2 numerical failure,
3 a check failed. Set ``JETFLOW_LOG`` (DEBUG, INFO, WARNING, ...) for logs on
stderr.
"""

import argparse
import json
import logging
import os
import platform
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .covariance import run_covariance_suite
from .dynamics import SodeProblem, autoparallel_rhs, harmonic_rhs, integrate
from .errors import (DegenerateLagrangianError, DimensionError, DomainError, ExpressionSyntaxError,
                     InconsistentChangeError, JetflowError, MetricDegenerateError,
                     MissingDerivativeError, NonFiniteState, QuadratureError, ScenarioError,
                     SingularChangeError, StepFailure)
from .jet import JetPoint, random_change, random_point
from .lagrange import connection_from_lagrangian, el_residual, el_semispray, el_semisprays
from .scenario import load_scenario
from .spray import canonical_connection, canonical_semispray

log = logging.getLogger("jetflow")

EXIT_OK, EXIT_INVALID, EXIT_NUMERICAL, EXIT_FAILED = 0, 1, 2, 3

_INVALID = (ExpressionSyntaxError, DimensionError, ScenarioError, InconsistentChangeError, OSError)
_NUMERICAL = (DomainError, SingularChangeError, MetricDegenerateError, DegenerateLagrangianError,
              StepFailure, NonFiniteState, QuadratureError, MissingDerivativeError)


def _bracket(args):
    return "printed" if args.paper_exact_bracket else "corrected"


def _semispray(sc, bracket):
    if sc.lagrangian is not None:
        return el_semispray(sc.lagrangian, sc.temporal_metric(), bracket)
    if sc.has_metrics:
        return canonical_semispray(sc.temporal_metric(), sc.phi)
    raise ScenarioError("scenario needs phi or a lagrangian")


def _connection(sc, bracket):
    if sc.lagrangian is not None:
        return connection_from_lagrangian(sc.lagrangian, sc.temporal_metric(), bracket)
    if sc.has_metrics:
        return canonical_connection(sc.temporal_metric(), sc.phi)
    raise ScenarioError("scenario needs phi or a lagrangian")


def _environment():
    return {"jetflow": __version__, "python": platform.python_version(), "numpy": np.__version__,
            "platform": platform.platform(), "rng": "numpy PCG64"}


def _emit(stream, obj):
    stream.write(json.dumps(obj, sort_keys=True) + "\n")


def write_csv(path_or_stream, traj):
    n = traj.n
    header = ",".join(["t"] + [f"x{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)])
    data = np.column_stack([traj.t, traj.x, traj.v])
    np.savetxt(path_or_stream, data, fmt="%.17g", delimiter=",", header=header, comments="",
               newline="\n")


def _output_paths(out, count):
    if count == 1:
        return [out]
    p = Path(out)
    return [p.with_name(f"{p.stem}-{k}{p.suffix}") for k in range(count)]


def cmd_integrate(args, out=None):
    out = out or sys.stdout
    sc = load_scenario(args.scenario)
    if not sc.initial:
        raise ScenarioError("integrate needs at least one [[initial]] entry")
    if sc.t_end is None:
        raise ScenarioError("integrate needs [integrator] t_end")
    if args.mode == "harmonic":
        rhs = harmonic_rhs(_semispray(sc, _bracket(args)))
    else:
        rhs = autoparallel_rhs(_connection(sc, _bracket(args)))
    if args.out is None and len(sc.initial) > 1:
        raise ScenarioError("several [[initial]] entries need --out")
    paths = _output_paths(args.out, len(sc.initial)) if args.out else [None]
    for init, path in zip(sc.initial, paths):
        traj = integrate(SodeProblem(rhs, init.t0, init.x0, init.v0, sc.t_end, sc.stepper))
        log.info("integrated %d steps (%s)", traj.stats["steps"], traj.stats["stepper"])
        if path is None:
            write_csv(out, traj)
        else:
            with open(path, "w", newline="\n") as fh:
                write_csv(fh, traj)
    return EXIT_OK


def cmd_check(args, out=None):
    out = out or sys.stdout
    sc = load_scenario(args.scenario)
    if not sc.has_metrics:
        raise ScenarioError("check needs phi (and optionally h11)")
    cs = sc.check
    seed = cs.seed if args.seed is None else args.seed
    changes = None
    if sc.change is not None:
        rng = np.random.default_rng(seed)
        changes = [sc.change] + [random_change(rng, sc.n) for _ in range(cs.random_changes)]
        seed = rng
    report = run_covariance_suite(sc.temporal_metric(), sc.phi, sc.lagrangian, rng=seed,
                                  changes=changes, random_changes=cs.random_changes,
                                  points=cs.points, tolerance=cs.tolerance, box=cs.box,
                                  corrupt=cs.corrupt)
    _emit(out, {"kind": "header", "command": "check", "scenario": str(args.scenario),
                "digest": sc.digest, "seed": cs.seed if args.seed is None else args.seed,
                "environment": _environment()})
    for rec in report.records:
        _emit(out, {"kind": "record", **rec.as_dict()})
    _emit(out, {"kind": "summary", "passed": report.passed, "failing": report.failing()})
    return EXIT_OK if report.passed else EXIT_FAILED


def _sample_points(sc, rng, count):
    box = sc.check.box
    return [random_point(rng, sc.n, box.get("t", (-1.0, 1.0)), box.get("x", (-1.0, 1.0)),
                         box.get("y", (-1.0, 1.0))) for _ in range(count)]


def cmd_el_compare(args, out=None):
    out = out or sys.stdout
    sc = load_scenario(args.scenario)
    if sc.lagrangian is None:
        raise ScenarioError("el-compare needs a lagrangian")
    h = sc.temporal_metric()
    seed = sc.check.seed if args.seed is None else args.seed
    rng = np.random.default_rng(seed)
    worst = {"corrected": 0.0, "printed": 0.0}
    points = _sample_points(sc, rng, sc.el.samples)
    for p in points:
        for bracket in worst:
            H, G = el_semisprays(sc.lagrangian, h, p, bracket)
            res, scale = el_residual(sc.lagrangian, h, p.t, p.x, p.y, -2.0 * H - 2.0 * G, True)
            worst[bracket] = max(worst[bracket], float(np.max(np.abs(res))) / (1.0 + scale))
    judged = _bracket(args)
    _emit(out, {"kind": "header", "command": "el-compare", "scenario": str(args.scenario),
                "digest": sc.digest, "seed": seed, "samples": len(points),
                "environment": _environment()})
    passed = True
    for bracket in sorted(worst):
        ok = worst[bracket] <= sc.el.tolerance
        _emit(out, {"kind": "record", "name": f"el-residual/{bracket}", "max_error": worst[bracket],
                    "tolerance": sc.el.tolerance, "passed": ok, "judged": bracket == judged})
        if bracket == judged:
            passed = ok
    _emit(out, {"kind": "summary", "passed": passed, "bracket": judged})
    return EXIT_OK if passed else EXIT_FAILED


def cmd_connection(args, out=None):
    out = out or sys.stdout
    sc = load_scenario(args.scenario)
    conn = _connection(sc, _bracket(args))
    if sc.initial:
        points = [JetPoint(i.t0, i.x0, i.v0) for i in sc.initial]
    else:
        seed = sc.check.seed if args.seed is None else args.seed
        points = _sample_points(sc, np.random.default_rng(seed), max(1, sc.check.points))
    for p in points:
        M, N = conn(p)
        _emit(out, {"t": p.t, "x": p.x.tolist(), "y": p.y.tolist(), "M": M.tolist(), "N": N.tolist()})
    return EXIT_OK


COMMANDS = {"integrate": cmd_integrate, "check": cmd_check, "el-compare": cmd_el_compare,
            "connection": cmd_connection}


def build_parser():
    parser = argparse.ArgumentParser(prog="jetflow", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"jetflow {__version__}")
    parser.add_argument("command", choices=sorted(COMMANDS))
    parser.add_argument("scenario", type=Path)
    parser.add_argument("--mode", choices=("harmonic", "autoparallel"), default="harmonic")
    parser.add_argument("--paper-exact-bracket", action="store_true",
                        help="use the alternative (uncorrected) Euler-Lagrange bracket")
    parser.add_argument("--out", type=Path, help="output CSV path (integrate)")
    parser.add_argument("--seed", type=int, help="override the scenario seed")
    return parser


def _configure_logging():
    level = os.environ.get("JETFLOW_LOG", "WARNING").upper()
    logging.basicConfig(level=getattr(logging, level, logging.WARNING), stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv=None):
    _configure_logging()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_INVALID
    try:
        return COMMANDS[args.command](args)
    except _INVALID as exc:
        print(f"jetflow: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except _NUMERICAL as exc:
        print(f"jetflow: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:
        print(f"jetflow: invalid input: {exc}", file=sys.stderr)
        return EXIT_INVALID
    except JetflowError as exc:
        print(f"jetflow: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
