"""``netreach`` command-line entry point.

Every subcommand writes a JSON run report (to stdout or ``--out``) and a
short human-readable summary to stderr.

Exit codes: 0 success, 2 parse/validation/input errors, 3 numerical
failure, 64 usage error.
"""
from __future__ import annotations

import argparse
import hashlib
import io
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .aggregate import build_aggregate, simulate_aggregate, simulate_subsystem_level, stack_initial_state
from .errors import DimensionMismatch, HorizonTooShort, InvalidProfile, NetreachError, NumericalFailure, ParseError, SchemaError
from .fixtures import NAMES as FIXTURES, fixture_text
from .generic import genericity_experiment
from .kernels import BACKEND
from .model import DimensionProfile, NetworkSpec, parse_network_spec, validate_network
from .reach import DEFAULT_TOL, is_base_reachable, is_leader_reachable
from .structured import circulant_sufficiency_test, symmetric_sufficiency_test
from .synth import build_cascade, follower_steerable, min_energy_steer, minimum_feasible_horizon, verify_plan

SCHEMA_VERSION = 1
EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_USAGE = 0, 2, 3, 64

LEADER_NOTE = (
    "leader-reachability: the follower aggregate driven by the leader states; "
    "some worked examples call this same property base-reachable"
)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        sys.exit(EXIT_USAGE)


class _InputError(NetreachError):
    pass


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _digest(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


class _Run:
    """Collects inputs and results for one invocation."""

    def __init__(self, command: str):
        self.command = command
        self.digests: dict[str, str] = {}
        self.results: dict = {}

    def read(self, path) -> str:
        path = Path(path)
        try:
            data = path.read_bytes()
        except OSError as exc:
            raise ParseError(f"cannot read '{path}': {exc.strerror or exc}") from None
        self.digests[str(path)] = _digest(data)
        return data.decode()

    def network(self, path=None, fixture=None) -> NetworkSpec:
        if fixture is not None:
            text = fixture_text(fixture)
            self.digests[f"fixture:{fixture}"] = _digest(text.encode())
        else:
            text = self.read(path)
        spec = parse_network_spec(text)
        report = validate_network(spec)
        self.results["validation"] = {"errors": list(report.errors), "warnings": list(report.warnings)}
        if report.errors:
            raise SchemaError("network failed validation: " + "; ".join(report.errors))
        return spec

    def array(self, path, what: str) -> np.ndarray:
        text = self.read(path).strip()
        try:
            return np.asarray(json.loads(text), dtype=float)
        except (json.JSONDecodeError, TypeError, ValueError):
            pass
        try:
            delim = "," if "," in text else None
            return np.loadtxt(io.StringIO(text), delimiter=delim, ndmin=1, comments="#")
        except ValueError as exc:
            raise ParseError(f"cannot parse {what} file '{path}': {exc}") from None

    def document(self) -> dict:
        return {
            "command": self.command,
            "inputs_digest": self.digests,
            "results": self.results,
            "versions": {"tool": __version__, "schema": SCHEMA_VERSION, "kernel_backend": BACKEND},
        }


def _emit(run: _Run, out):
    text = json.dumps(run.document(), indent=2, default=_json_default)
    if out:
        Path(out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _json_default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.floating, np.integer, np.bool_)):
        return obj.item()
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _say(*lines):
    for line in lines:
        print(line, file=sys.stderr)


def _trajectory_csv(traj) -> str:
    n, p = traj.states.shape[1], traj.outputs.shape[1]
    header = ["t"] + [f"x_{k + 1}" for k in range(n)] + [f"w_{k + 1}" for k in range(p)]
    rows = [",".join(header)]
    for t, x, w in zip(traj.times, traj.states, traj.outputs):
        rows.append(",".join([str(int(t))] + [_fmt(v) for v in x] + [_fmt(v) for v in w]))
    return "\n".join(rows) + "\n"


# --------------------------------------------------------------------------
# subcommands


def cmd_validate(args, run):
    spec = parse_network_spec(run.read(args.file))
    report = validate_network(spec)
    run.results["validation"] = {"errors": list(report.errors), "warnings": list(report.warnings)}
    _emit(run, args.out)
    for e in report.errors:
        _say(f"error: {e}")
    for w in report.warnings:
        _say(f"warning: {w}")
    _say("valid" if report.ok else "invalid")
    return EXIT_OK if report.ok else EXIT_INPUT


def cmd_aggregate(args, run):
    spec = run.network(args.file)
    agg = build_aggregate(spec)
    run.results["aggregate"] = {
        "dims": vars(agg.dims),
        **{name: getattr(agg, name) for name in ("A_f", "B_f", "C_f", "A_l", "B_l", "C_l", "L_ff", "L_lf")},
    }
    _emit(run, args.out)
    d = agg.dims
    _say(f"aggregate: n_f={d.n_f} n_l={d.n_l} m_base={d.m_base}")
    return EXIT_OK


def cmd_simulate(args, run):
    spec = run.network(args.file)
    n = sum(s.n for s in spec.subsystems)
    x0 = stack_initial_state(n, run.array(args.x0, "x0") if args.x0 else None)
    u = run.array(args.u, "input sequence") if args.u else None
    if u is None and args.steps is None:
        raise _InputError("simulate needs --u or --steps")
    if args.level == "subsystem":
        traj = simulate_subsystem_level(spec, x0, u, args.steps)
    else:
        n_f = spec.dims.n_f
        traj = simulate_aggregate(build_aggregate(spec), x0[:n_f], x0[n_f:], u, args.steps)
    text = _trajectory_csv(traj)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    _say(f"simulated {traj.horizon} steps at {args.level} level")
    return EXIT_OK


def _reach_results(agg, which, methods, tol):
    out = {}
    if which in ("leader", "both"):
        out["leader"] = {m: is_leader_reachable(agg, tol, m).to_document() for m in methods}
        out["leader"]["note"] = LEADER_NOTE
    if which in ("base", "both"):
        out["base"] = {m: is_base_reachable(agg, tol, m).to_document() for m in methods}
    return out


def cmd_reach(args, run):
    spec = run.network(args.file)
    methods = ["kalman", "pbh", "gramian"] if args.method == "all" else [args.method]
    res = _reach_results(build_aggregate(spec), args.which, methods, args.tol)
    run.results["reach"] = res
    _emit(run, args.out)
    for prop, by_method in res.items():
        for m in methods:
            r = by_method[m]
            _say(f"{prop:>6} [{m}]: {r['verdict']} (rank {r['rank']}/{r['state_dim']}, tol {args.tol:g})")
    return EXIT_OK


def _structured_results(agg, tol):
    sym = symmetric_sufficiency_test(agg, tol)
    circ = circulant_sufficiency_test(agg, tol)
    return {"symmetric": sym.to_document(), "circulant": circ.to_document()}, (sym, circ)


def cmd_structured(args, run):
    spec = run.network(args.file)
    res, verdicts = _structured_results(build_aggregate(spec), args.tol)
    run.results["structured"] = res
    _emit(run, args.out)
    for v in verdicts:
        if not v.applies:
            _say(f"{v.structure}: not detected")
        else:
            state = "hypotheses hold -> Reachable" if v.hypotheses_hold else "hypotheses fail (no conclusion)"
            _say(f"{v.structure}: detected; {state}; Kalman cross-check {v.cross_check.verdict.value}")
    return EXIT_OK


def _steer(spec, target, x0, steps, tol):
    cascade = build_cascade(build_aggregate(spec))
    plan = min_energy_steer(cascade, x0, target, steps, tol)
    check = verify_plan(spec, plan)
    doc = plan.to_document()
    doc["tolerance"] = tol
    doc["minimum_feasible_horizon"] = minimum_feasible_horizon(cascade, tol)
    doc["resimulated_error"] = check.resimulated_error
    return plan, doc


def cmd_steer(args, run):
    spec = run.network(args.file)
    target = run.array(args.target, "target")
    x0 = run.array(args.x0, "x0") if args.x0 else None
    plan, doc = _steer(spec, target, x0, args.steps, args.tol)
    run.results["plan"] = doc
    if args.inputs_csv:
        m = plan.inputs.shape[1]
        lines = [",".join(["t"] + [f"u_{k + 1}" for k in range(m)])]
        lines += [",".join([str(t)] + [_fmt(v) for v in row]) for t, row in enumerate(plan.inputs)]
        Path(args.inputs_csv).write_text("\n".join(lines) + "\n")
    if args.trajectory:
        Path(args.trajectory).write_text(_trajectory_csv(plan.predicted))
    _emit(run, args.out)
    _say(f"steer: T={plan.horizon} energy={plan.energy:.6g} error={plan.achieved_error:.3g}")
    return EXIT_OK


def cmd_generic(args, run):
    try:
        doc = json.loads(run.read(args.profile))
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed profile: {exc}") from None
    if not isinstance(doc, dict):
        raise ParseError("profile must be a JSON object")
    profile = DimensionProfile.from_document(doc)
    report = genericity_experiment(profile, args.trials, args.seed, args.tol, args.workers)
    run.results["generic"] = report.to_document()
    if args.margins_csv:
        lines = ["trial,margin"] + [f"{k},{_fmt(v)}" for k, v in enumerate(report.margins)]
        Path(args.margins_csv).write_text("\n".join(lines) + "\n")
    _emit(run, args.out)
    counts = report.reachable_count
    _say(
        f"generic: {report.trials} trials, leader {counts['leader']}, base {counts['base']}, "
        f"cascade {counts['cascade']}, min margin {report.min_margin:.3g}"
    )
    for f in report.failures[:10]:
        _say(f"  {f['property']} failed at trial {f['trial']} (seed {f['trial_seed']})")
    return EXIT_OK


def cmd_demo(args, run):
    spec = run.network(fixture=args.name)
    agg = build_aggregate(spec)
    tol = args.tol
    run.results["aggregate"] = {"A_f": agg.A_f, "B_f": agg.B_f, "A_l": agg.A_l, "B_l": agg.B_l}
    run.results["reach"] = _reach_results(agg, "both", ["kalman", "pbh", "gramian"], tol)
    run.results["structured"], verdicts = _structured_results(agg, tol)
    cascade = build_cascade(agg)
    run.results["follower_steerable"] = follower_steerable(cascade, tol).to_document()
    _, run.results["plan"] = _steer(spec, np.ones(agg.dims.n_f), None, None, tol)
    _emit(run, args.out)
    leader = run.results["reach"]["leader"]["kalman"]
    _say(f"demo {args.name}: leader {leader['verdict']} (rank {leader['rank']})")
    for v in verdicts:
        if v.applies:
            _say(f"  {v.structure} structure detected; hypotheses hold: {v.hypotheses_hold}")
    _say(f"  follower steerable: {run.results['follower_steerable']['verdict']}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="netreach", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"netreach {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser, required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, help=help_)
        sp.set_defaults(func=fn)
        sp.add_argument("--out", help="write the report here instead of stdout")
        return sp

    sp = add("validate", cmd_validate, "check a network document")
    sp.add_argument("file")

    sp = add("aggregate", cmd_aggregate, "print the stacked closed-loop matrices")
    sp.add_argument("file")

    sp = add("simulate", cmd_simulate, "simulate and write a trajectory CSV")
    sp.add_argument("file")
    sp.add_argument("--x0", help="initial state vector file (JSON array or text)")
    sp.add_argument("--u", help="base-input sequence file (JSON nested array or CSV, one row per step)")
    sp.add_argument("--steps", type=int)
    sp.add_argument("--level", choices=["subsystem", "aggregate"], default="subsystem")

    sp = add("reach", cmd_reach, "leader/base reachability rank tests")
    sp.add_argument("file")
    sp.add_argument("--which", choices=["leader", "base", "both"], default="both")
    sp.add_argument("--method", choices=["kalman", "pbh", "gramian", "all"], default="kalman")
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)

    sp = add("structured", cmd_structured, "symmetric / circulant sufficiency tests")
    sp.add_argument("file")
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)

    sp = add("steer", cmd_steer, "minimum-energy follower steering")
    sp.add_argument("file")
    sp.add_argument("--target", required=True)
    sp.add_argument("--x0")
    sp.add_argument("--steps", type=int)
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sp.add_argument("--inputs-csv", help="also write the input sequence as CSV")
    sp.add_argument("--trajectory", help="also write the predicted trajectory as CSV")

    sp = add("generic", cmd_generic, "randomized reachability experiment")
    sp.add_argument("--profile", required=True)
    sp.add_argument("--trials", type=int, default=1000)
    sp.add_argument("--seed", type=int, default=0)
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    sp.add_argument("--workers", type=int, default=None)
    sp.add_argument("--margins-csv")

    sp = add("demo", cmd_demo, "full pipeline on a shipped example network")
    sp.add_argument("name", choices=FIXTURES)
    sp.add_argument("--tol", type=float, default=DEFAULT_TOL)
    return p


def run(argv=None) -> int:
    args = build_parser().parse_args(argv)
    r = _Run(args.command)
    try:
        return args.func(args, r)
    except (NumericalFailure, HorizonTooShort) as exc:
        _say(f"netreach: numerical failure: {exc}")
        return EXIT_NUMERICAL
    except (ParseError, SchemaError, InvalidProfile, DimensionMismatch, _InputError) as exc:
        _say(f"netreach: error: {exc}")
        return EXIT_INPUT


def main(argv=None):
    sys.exit(run(argv))


if __name__ == "__main__":
    main()
