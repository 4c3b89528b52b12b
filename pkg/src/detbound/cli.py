"""Command-line entry point.

Exit codes: 0 success, 2 valid but negative result (classical behavior, no
violation, failed reproduction check), 1 error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys

import numpy as np

from . import io
from .efficiency import (
    DEFAULT_TOLERANCE,
    ModelClass,
    bound_via_bisection,
    unknown_vs_known_curve,
)
from .errors import DetboundError, NeverViolated
from .npa import npa_certificate, npa_max_value, nonsignalling_feasible
from .reproduce import CASES, run_case
from .scenario import behavior_from_counts
from .separation import find_violated_inequality
from .simulate import (
    DetectionModel,
    apply_detection_efficiency,
    depolarized_state,
    make_rng,
    quantum_behavior,
    random_directions,
    sample_counts,
)

EXIT_OK, EXIT_ERROR, EXIT_NEGATIVE = 0, 1, 2

SCHEMA_HELP = """\
file formats (JSON, finite decimal numbers only):
  behavior    {"n": int, "m": int, "pA": [n], "pB": [m], "pAB": [[m] x n]}
  inequality  {"n": int, "m": int, "hA": [n], "hB": [m], "hAB": [[m] x n]}
  counts      {"n", "m", "nA", "nB", "nAB", "trialsPerContext"}
  curve CSV   header known_eta,bound,q (empty bound = unreachable)
"""


def _emit(obj, out=None):
    text = io.dumps(obj)
    if out:
        io.atomic_write_text(out, text)
    sys.stdout.write(text)


def _model(args) -> ModelClass:
    return ModelClass.parse(args.model, args.level)


def cmd_find_inequality(args) -> int:
    behavior = io.read_behavior(args.behavior)
    res = find_violated_inequality(behavior, tolerance=args.tolerance or args.tol or 1e-7)
    summary = {"status": res.status.value}
    if res.violated:
        summary["quantumValue"] = res.quantum_value
        if args.out:
            io.write_inequality(args.out, res.inequality)
        summary["inequality"] = io.inequality_to_dict(res.inequality)
        _emit(summary)
        return EXIT_OK
    if res.certificate is not None:
        summary["certificateScale"] = res.certificate.scale
    _emit(summary)
    return EXIT_NEGATIVE


def cmd_simulate(args) -> int:
    rng = make_rng(args.seed)
    state = depolarized_state(args.visibility)
    a_dirs = random_directions(args.n, rng)
    b_dirs = random_directions(args.m, rng)
    ideal = quantum_behavior(state, a_dirs, b_dirs)
    eta_b = args.eta if args.eta_b is None else args.eta_b
    lossy = apply_detection_efficiency(ideal, DetectionModel(args.eta, eta_b))
    fmt = args.format or ("counts" if args.out and "count" in args.out.lower() else "behavior")
    if fmt == "counts":
        if not args.trials:
            raise DetboundError("counts output needs --trials")
        data = io.counts_to_dict(sample_counts(lossy, args.trials, rng))
    elif args.trials:
        counts = sample_counts(lossy, args.trials, rng)
        data = io.behavior_to_dict(behavior_from_counts(counts, args.trials))
    else:
        data = io.behavior_to_dict(lossy)
    if args.out:
        io.write_json(args.out, data)
    _emit({
        "format": fmt,
        "data": data,
        "aDirections": [d.bloch.tolist() for d in a_dirs],
        "bDirections": [d.bloch.tolist() for d in b_dirs],
    })
    return EXIT_OK


def _oriented(args):
    """Read the inequality with the unknown detector placed on Alice's side."""
    ineq = io.read_inequality(args.ineq)
    return ineq.transpose() if args.unknown_party == "B" else ineq


def cmd_eta_bound(args) -> int:
    ineq = _oriented(args)
    model = _model(args)
    try:
        b = bound_via_bisection(ineq, model, q=args.q, tolerance=args.tol or DEFAULT_TOLERANCE,
                                known_eta=args.known_eta)
    except NeverViolated as exc:
        _emit({"etaLower": None, "modelClass": str(model), "q": args.q,
               "status": "NeverViolated", "message": str(exc)}, args.out)
        return EXIT_NEGATIVE
    _emit({**b.as_dict(), "status": "Bounded"}, args.out)
    return EXIT_OK


def cmd_eta_curve(args) -> int:
    ineq = _oriented(args)
    model = _model(args)
    if args.known_etas:
        grid = args.known_etas
    else:
        grid = np.round(np.linspace(args.grid_min, 1.0, args.grid_points), 6).tolist()
    points = []
    for q in args.q:
        points += unknown_vs_known_curve(ineq, grid, q, model, args.tol or DEFAULT_TOLERANCE)
    if args.out:
        io.write_curve(args.out, points)
    sys.stdout.write(io.curve_to_csv(points))
    return EXIT_OK


def cmd_npa_max(args) -> int:
    ineq = io.read_inequality(args.ineq)
    value = npa_max_value(ineq, args.level)
    _emit({"value": value, "level": args.level, "status": "Optimal"}, args.out)
    return EXIT_OK


def cmd_npa_check(args) -> int:
    behavior = io.read_behavior(args.behavior)
    if args.level == 0:
        ok = nonsignalling_feasible(behavior)
        value = None
    else:
        value, _ = npa_certificate(behavior, args.level)
        ok = value >= -1e-7
    _emit({"value": value, "level": args.level,
           "status": "Feasible" if ok else "Infeasible"}, args.out)
    return EXIT_OK if ok else EXIT_NEGATIVE


def cmd_reproduce(args) -> int:
    names = CASES if args.case == "all" else [args.case]
    reports = []
    for name in names:
        rep = run_case(name, level=args.level, trials=args.trials, seed=args.seed,
                       threads=args.threads, tolerance=args.tol)
        for line in rep.lines():
            print(line, flush=True)
        reports.append(rep.as_dict())
        if name == "known-detector-curve" and args.curve_out:
            pts = [p for c in rep.artifacts["curves"].values() for p in c]
            io.write_curve(args.curve_out, pts)
    if args.out:
        io.write_json(args.out, {"reports": reports})
    ok = all(r["passed"] for r in reports)
    print("PASS" if ok else "FAIL")
    return EXIT_OK if ok else EXIT_NEGATIVE


def build_parser() -> argparse.ArgumentParser:
    def global_flags(suppress: bool) -> argparse.ArgumentParser:
        # accepted before or after the subcommand; the subcommand copies use
        # SUPPRESS so they do not overwrite values given up front
        def d(value):
            return argparse.SUPPRESS if suppress else value

        g = argparse.ArgumentParser(add_help=False)
        g.add_argument("--seed", type=int, default=d(None), help="base RNG seed")
        g.add_argument("--threads", type=int, default=d(1), help="worker processes for trials")
        g.add_argument("--tol", type=float, default=d(None), help="bisection / LP tolerance")
        g.add_argument("--out", default=d(None), help="output file")
        g.add_argument("-v", "--verbose", action="store_true", default=d(False))
        return g

    common, sub_common = global_flags(False), global_flags(True)

    parser = argparse.ArgumentParser(
        prog="detbound",
        description="Bell inequalities free of the detection loophole and "
                    "device-independent detector efficiency bounds.",
        epilog=SCHEMA_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter,
        parents=[common],
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        p = sub.add_parser(name, help=help_, parents=[sub_common], epilog=SCHEMA_HELP,
                           formatter_class=argparse.RawDescriptionHelpFormatter)
        p.set_defaults(func=fn)
        return p

    p = add("find-inequality", cmd_find_inequality, "synthesize a violated inequality")
    p.add_argument("--behavior", required=True)
    p.add_argument("--tolerance", type=float, default=None)

    p = add("simulate", cmd_simulate, "simulate random measurements on |Phi+>")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--trials", type=int, default=None, help="trials per context")
    p.add_argument("--eta", type=float, default=1.0)
    p.add_argument("--eta-b", type=float, default=None)
    p.add_argument("--visibility", type=float, default=1.0)
    p.add_argument("--format", choices=("counts", "behavior"), default=None)

    def model_args(p):
        p.add_argument("--model", default="npa", choices=("classical", "ns", "npa"))
        p.add_argument("--level", type=int, default=2)
        p.add_argument("--unknown-party", choices=("A", "B"), default="A",
                       help="whose efficiency is bounded when --known-eta fixes the other")

    p = add("eta-bound", cmd_eta_bound, "certified lower bound on detection efficiency")
    p.add_argument("--ineq", required=True)
    model_args(p)
    p.add_argument("--q", type=float, default=0.0)
    p.add_argument("--known-eta", type=float, default=None,
                   help="efficiency of the other detector (omit for equal efficiencies)")

    p = add("eta-curve", cmd_eta_curve, "unknown-detector bound against known efficiency")
    p.add_argument("--ineq", required=True)
    model_args(p)
    p.add_argument("--q", type=float, nargs="+", required=True)
    p.add_argument("--known-etas", type=float, nargs="+", default=None)
    p.add_argument("--grid-min", type=float, default=0.7)
    p.add_argument("--grid-points", type=int, default=13)

    p = add("npa-max", cmd_npa_max, "NPA upper bound on an inequality's quantum maximum")
    p.add_argument("--ineq", required=True)
    p.add_argument("--level", type=int, default=2)

    p = add("npa-check", cmd_npa_check, "test a behavior against an NPA level")
    p.add_argument("--behavior", required=True)
    p.add_argument("--level", type=int, default=2)

    p = add("reproduce", cmd_reproduce, "run a published-number reproduction case")
    p.add_argument("--case", required=True, choices=CASES + ("all",))
    p.add_argument("--level", type=int, default=None)
    p.add_argument("--trials", type=int, default=None)
    p.add_argument("--curve-out", default=None, help="CSV for the known-detector curves")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_ERROR
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (DetboundError, io.FormatError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(SCHEMA_HELP, file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
