"""Command-line interface.

Exit codes: 0 success, 1 semantic negative (inconsistent, not entailed,
unknown at the epsilon boundary), 2 usage or input error, 3 resource limit
(world cap or iteration cap).  JSON payloads serialize rationals as "num/den"
strings and are byte-deterministic for identical invocations in exact mode.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys
from dataclasses import dataclass
from fractions import Fraction

from .compression import (
    VerificationMode,
    build_evolution_program,
    solve_profile,
    verify_evolution,
)
from .errors import (
    BaseTooLarge,
    InconsistentProgram,
    LPNumericalFailure,
    MissingTimeSlice,
    NonConvergence,
    NonNormalConstraint,
    TimePointOutsideCalendar,
    TplpError,
    UniverseEmpty,
)
from .grounder import (
    GroundingMode,
    ground_program,
    ground_temporal_variables,
    pprogram_to_ptprogram,
    unfold,
)
from .intervals import ProbInterval, eval_interval_expr, is_consistent, parse_rational
from .model import validate_annotation
from .parser import (
    QueryKind,
    parse_program,
    parse_query,
    parse_skeleton,
    render_program,
)
from .psat import (
    SolveOptions,
    Verdict,
    check_consistency,
    entails,
    max_entropy_model,
    tighten,
)
from .simplex import LPMode
from .model import substitute_time

ENV_MAX_WORLD_ATOMS = "TPLP_MAX_WORLD_ATOMS"


@dataclass
class CommandResult:
    exit_code: int
    payload: str


class _CliError(Exception):
    def __init__(self, exit_code: int, message: str):
        super().__init__(message)
        self.exit_code = exit_code
        self.message = message


def _rat(q: Fraction) -> str:
    q = Fraction(q)
    return f"{q.numerator}/{q.denominator}"


def _interval_json(iv: ProbInterval) -> list[str]:
    return [_rat(iv.lo), _rat(iv.hi)]


def _witness_json(dist) -> list[dict]:
    return [
        {"world": [str(a) for a in w.atoms()], "p": _rat(p)}
        for w, p in dist.items()
    ]


def _dump(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=2)


def _read(path: str) -> str:
    try:
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as exc:
        raise _CliError(2, f"cannot read {path}: {exc}") from None


def _emit_diagnostics(diags):
    for d in diags:
        print(str(d), file=sys.stderr)


def _load_program(path: str):
    result = parse_program(_read(path))
    _emit_diagnostics(result.diagnostics)
    if not result.ok:
        raise _CliError(2, f"{path}: {len(result.errors)} error(s)")
    return result.program


def _options(args) -> SolveOptions:
    cap = args.max_world_atoms
    if cap is None:
        env = os.environ.get(ENV_MAX_WORLD_ATOMS)
        cap = int(env) if env else 16
    return SolveOptions(
        epsilon=parse_rational(args.epsilon),
        max_world_atoms=cap,
        lp_mode=LPMode(args.lp),
    )


def _grounded_pp(args):
    program = _load_program(args.file)
    mode = GroundingMode(args.grounding)
    ground = ground_program(program, mode)
    pp = unfold(ground, warn=lambda msg: print(f"warning: {msg}", file=sys.stderr))
    return program, pp


# --- subcommand handlers -------------------------------------------------------------


def _cmd_validate(args) -> CommandResult:
    result = parse_program(_read(args.file))
    _emit_diagnostics(result.diagnostics)
    errors = [d for d in result.diagnostics if d.is_error]
    warnings = [d for d in result.diagnostics if not d.is_error]
    if args.json:
        payload = _dump(
            {
                "verdict": "ok" if not errors else "error",
                "errors": [
                    {"kind": d.kind.value, "message": d.message, "at": str(d.span or "")}
                    for d in errors
                ],
                "warnings": [
                    {"kind": d.kind.value, "message": d.message, "at": str(d.span or "")}
                    for d in warnings
                ],
            }
        )
    else:
        verdict = "ok" if not errors else f"{len(errors)} error(s)"
        payload = f"{verdict} ({len(warnings)} warning(s))"
    return CommandResult(0 if not errors else 2, payload)


def _cmd_ground(args) -> CommandResult:
    program = _load_program(args.file)
    text = render_program(ground_program(program, GroundingMode(args.grounding)))
    payload = _dump({"program": text}) if args.json else text.rstrip("\n")
    return CommandResult(0, payload)


def _cmd_unfold(args) -> CommandResult:
    program = _load_program(args.file)
    normalized = ground_temporal_variables(program)
    pp = unfold(normalized, warn=lambda msg: print(f"warning: {msg}", file=sys.stderr))
    text = render_program(pprogram_to_ptprogram(pp, program.calendar))
    payload = _dump({"program": text}) if args.json else text.rstrip("\n")
    return CommandResult(0, payload)


def _cmd_consistent(args) -> CommandResult:
    _, pp = _grounded_pp(args)
    opts = _options(args)
    outcome = check_consistency(pp, opts)
    body = {
        "verdict": outcome.verdict.value,
        "branch_count": outcome.branch_count,
        "eps": _rat(outcome.epsilon),
        "witness": _witness_json(outcome.witness) if outcome.witness else None,
    }
    if args.json:
        payload = _dump(body)
    else:
        lines = [outcome.verdict.value]
        if outcome.witness is not None:
            for w, p in outcome.witness.items():
                lines.append(f"  {w}: {_rat(p)}")
        payload = "\n".join(lines)
    code = 0 if outcome.verdict is Verdict.CONSISTENT else 1
    return CommandResult(code, payload)


def _cmd_entail(args) -> CommandResult:
    program, pp = _grounded_pp(args)
    qresult = parse_query(_read(args.queryfile))
    _emit_diagnostics(qresult.diagnostics)
    if not qresult.ok:
        raise _CliError(2, f"{args.queryfile}: invalid query")
    query = qresult.query
    if query.kind is not QueryKind.ENTAIL:
        raise _CliError(2, "the entail command needs an '?entail' query")
    annot_diags = validate_annotation(query.annot, program.calendar)
    _emit_diagnostics(annot_diags)
    if any(d.is_error for d in annot_diags):
        raise _CliError(2, "invalid query annotation")
    opts = _options(args)
    try:
        outcome = entails(pp, query, program.calendar, opts)
    except InconsistentProgram:
        payload = (
            _dump({"verdict": "INCONSISTENT_PROGRAM"})
            if args.json
            else "INCONSISTENT_PROGRAM"
        )
        return CommandResult(1, payload)
    if outcome.vacuous:
        print("warning: the query constraint has an empty solution set", file=sys.stderr)
    verdict = "ENTAILED" if outcome.entailed else "NOT_ENTAILED"
    if args.json:
        payload = _dump(
            {
                "verdict": verdict,
                "vacuous": outcome.vacuous,
                "branch_count": outcome.branch_count,
                "eps": _rat(outcome.epsilon),
                "per_time": [
                    {
                        "time": v.time,
                        "bounds": _interval_json(v.bounds),
                        "target": _interval_json(v.target),
                        "holds": v.holds,
                    }
                    for v in outcome.per_time
                ],
            }
        )
    else:
        lines = [verdict]
        for v in outcome.per_time:
            lines.append(f"  t={v.time}: tightened {v.bounds} target {v.target} -> {v.holds}")
        payload = "\n".join(lines)
    return CommandResult(0 if outcome.entailed else 1, payload)


def _cmd_tighten(args) -> CommandResult:
    program, pp = _grounded_pp(args)
    qresult = parse_query(_read(args.queryfile))
    _emit_diagnostics(qresult.diagnostics)
    if not qresult.ok:
        raise _CliError(2, f"{args.queryfile}: invalid query")
    query = qresult.query
    if query.kind is not QueryKind.TIGHTEN:
        raise _CliError(2, "the tighten command needs a '?tighten' query")
    opts = _options(args)
    if query.at is not None and query.at not in program.calendar:
        raise _CliError(2, f"time point {query.at} is outside the calendar")
    times = [query.at] if query.at is not None else list(program.calendar.points)
    intervals: dict[str, ProbInterval] = {}
    sensitive = False
    branch_count = 0
    try:
        for t in times:
            instance = substitute_time(query.formula, t)
            result = tighten(pp, instance, opts)
            intervals[str(instance)] = result.interval
            sensitive = sensitive or result.boundary_sensitive
            branch_count = max(branch_count, result.branch_count)
    except InconsistentProgram:
        payload = (
            _dump({"verdict": "INCONSISTENT_PROGRAM"})
            if args.json
            else "INCONSISTENT_PROGRAM"
        )
        return CommandResult(1, payload)
    if args.json:
        payload = _dump(
            {
                "verdict": "OK",
                "intervals": {k: _interval_json(iv) for k, iv in intervals.items()},
                "branch_count": branch_count,
                "eps": _rat(opts.epsilon),
                "boundary_sensitive": sensitive,
            }
        )
    else:
        payload = "\n".join(f"{k}: {iv}" for k, iv in intervals.items())
    return CommandResult(0, payload)


def _cmd_maxent(args) -> CommandResult:
    _, pp = _grounded_pp(args)
    opts = _options(args)
    try:
        outcome = max_entropy_model(pp, opts)
    except InconsistentProgram:
        payload = (
            _dump({"verdict": "INCONSISTENT_PROGRAM"})
            if args.json
            else "INCONSISTENT_PROGRAM"
        )
        return CommandResult(1, payload)
    if args.json:
        payload = _dump(
            {
                "verdict": "OK",
                "entropy": outcome.entropy,
                "branch_count": outcome.branch_count,
                "eps": _rat(opts.epsilon),
                "witness": _witness_json(outcome.distribution),
            }
        )
    else:
        lines = [f"entropy {outcome.entropy:.6f} nats"]
        for w, p in outcome.distribution.items():
            lines.append(f"  {w}: {_rat(p)}")
        payload = "\n".join(lines)
    return CommandResult(0, payload)


def _load_profile_csv(path: str):
    per_time: dict[str, dict[int, ProbInterval]] = {}
    times: set[int] = set()
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            for lineno, row in enumerate(csv.reader(fh), start=1):
                if not row or row[0].strip().startswith("#"):
                    continue
                if lineno == 1 and row[0].strip().lower() in ("formula", "formula_id", "id"):
                    continue
                if len(row) != 4:
                    raise _CliError(2, f"{path}:{lineno}: expected formula_id,time,lo,hi")
                slot, t_text, lo_text, hi_text = (c.strip() for c in row)
                try:
                    t = int(t_text)
                    iv = ProbInterval(parse_rational(lo_text), parse_rational(hi_text))
                except ValueError as exc:
                    raise _CliError(2, f"{path}:{lineno}: {exc}") from None
                per_time.setdefault(slot, {})[t] = iv
                times.add(t)
    except OSError as exc:
        raise _CliError(2, f"cannot read {path}: {exc}") from None
    if not times:
        raise _CliError(2, f"{path}: no annotation slices found")
    return per_time, sorted(times)


def _cmd_evolve(args) -> CommandResult:
    skeleton, diags = parse_skeleton(_read(args.skeleton))
    _emit_diagnostics(diags)
    if skeleton is None:
        raise _CliError(2, f"{args.skeleton}: invalid skeleton")
    per_time, delta = _load_profile_csv(args.profile)
    program = build_evolution_program(skeleton, per_time, delta)
    text = render_program(program)
    if not args.verify:
        payload = _dump({"program": text}) if args.json else text.rstrip("\n")
        return CommandResult(0, payload)
    opts = _options(args)
    mode = VerificationMode(args.verify)
    try:
        profile = solve_profile(skeleton, per_time, delta, opts)
    except InconsistentProgram as exc:
        payload = _dump({"verdict": "INCONSISTENT_SLICE", "detail": str(exc)})
        return CommandResult(1, payload)
    report = verify_evolution(profile, program, mode)
    payload = _dump(
        {
            "program": text,
            "mode": mode.value,
            "all_inside": report.all_inside,
            "literal_model": report.literal_model,
            "checks": [
                {
                    "formula": c.formula,
                    "time": c.time,
                    "mass": _rat(c.mass),
                    "interval": _interval_json(c.interval),
                    "inside": c.inside,
                }
                for c in report.checks
            ],
        }
    )
    return CommandResult(0, payload)


def _cmd_ialg(args) -> CommandResult:
    try:
        result = eval_interval_expr(args.expr)
    except ValueError as exc:
        raise _CliError(2, str(exc)) from None
    if isinstance(result, bool):
        payload = _dump({"value": result}) if args.json else str(result).lower()
        return CommandResult(0, payload)
    if args.json:
        payload = _dump(
            {"interval": _interval_json(result), "consistent": is_consistent(result)}
        )
    else:
        note = "" if is_consistent(result) else " (inconsistent)"
        payload = f"{result}{note}"
    return CommandResult(0, payload)


# --- argument wiring -----------------------------------------------------------------


def _build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--epsilon", default="1/1000000", help="strict-violation margin")
    common.add_argument(
        "--max-world-atoms",
        type=int,
        default=None,
        help=f"atom cap for world enumeration (env {ENV_MAX_WORLD_ATOMS}, default 16)",
    )
    common.add_argument(
        "--grounding", choices=["full", "relevant"], default="full", help="grounding mode"
    )
    common.add_argument("--lp", choices=["exact", "float"], default="exact", help="LP arithmetic")
    common.add_argument("--json", action="store_true", help="machine-readable output")

    parser = argparse.ArgumentParser(
        prog="tplp", description="Temporal probabilistic logic program toolkit"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", parents=[common], help="parse and validate a program")
    p.add_argument("file")
    p.set_defaults(handler=_cmd_validate)

    p = sub.add_parser("ground", parents=[common], help="emit the ground program")
    p.add_argument("file")
    p.set_defaults(handler=_cmd_ground)

    p = sub.add_parser("unfold", parents=[common], help="emit the temporally unfolded program")
    p.add_argument("file")
    p.set_defaults(handler=_cmd_unfold)

    p = sub.add_parser("consistent", parents=[common], help="decide consistency")
    p.add_argument("file")
    p.set_defaults(handler=_cmd_consistent)

    p = sub.add_parser("entail", parents=[common], help="check an entailment query")
    p.add_argument("file")
    p.add_argument("queryfile")
    p.set_defaults(handler=_cmd_entail)

    p = sub.add_parser("tighten", parents=[common], help="tightest entailed interval")
    p.add_argument("file")
    p.add_argument("queryfile")
    p.set_defaults(handler=_cmd_tighten)

    p = sub.add_parser("maxent", parents=[common], help="maximum-entropy model")
    p.add_argument("file")
    p.set_defaults(handler=_cmd_maxent)

    p = sub.add_parser("evolve", parents=[common], help="build an evolution program")
    p.add_argument("skeleton")
    p.add_argument("profile")
    p.add_argument(
        "--verify", choices=["literal", "conditional"], default=None,
        help="verify the construction and report per-slice masses",
    )
    p.set_defaults(handler=_cmd_evolve)

    p = sub.add_parser("ialg", parents=[common], help="evaluate an interval expression")
    p.add_argument("expr")
    p.set_defaults(handler=_cmd_ialg)

    return parser


def run(argv) -> CommandResult:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return CommandResult(2 if exc.code not in (0, None) else 0, "")
    try:
        return args.handler(args)
    except _CliError as exc:
        print(f"error: {exc.message}", file=sys.stderr)
        return CommandResult(exc.exit_code, "")
    except BaseTooLarge as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CommandResult(3, "")
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CommandResult(3, "")
    except (
        UniverseEmpty,
        NonNormalConstraint,
        MissingTimeSlice,
        TimePointOutsideCalendar,
        LPNumericalFailure,
    ) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CommandResult(2, "")
    except TplpError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CommandResult(2, "")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return CommandResult(2, "")


def main():
    result = run(sys.argv[1:])
    if result.payload:
        print(result.payload)
    sys.exit(result.exit_code)


if __name__ == "__main__":
    main()
