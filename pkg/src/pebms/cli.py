"""Command-line interface wiring all modules together.

Subcommands
-----------
check    verify a space's axioms and print the report
solve    verify contraction preconditions, run Picard iteration, and emit
         a trace CSV plus a convergence certificate
gallery  rebuild every worked example and compare against its expected outcome
fuzz     run a seeded generator/checker round-trip campaign
bound    evaluate error bounds (banach / kannan / modified_kannan) from a
         saved trace

Spaces are JSON files in the documented format, or ``gallery:<id>`` to use
a built-in example without a file.  Exit codes are a stable contract:

    0  success
    1  mathematical failure (axiom violation, precondition failure,
       expectation mismatch, generator/checker inconsistency)
    2  usage or parse error
    3  non-convergence

Examples
--------
    pebms check gallery:ebm_235 --profile ebm
    pebms check space.json --format json
    pebms solve gallery:pebm_max --map x/4 --family banach --k 0.25 --x0 1 --trace-out trace.csv
    pebms gallery --format text
    pebms fuzz --trials 500 --seed 42
    pebms bound --family kannan --k 0.3333 --n 5 --p01 1.0
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .axioms import check_axioms, check_axioms_sampled
from .errors import DomainError, UnknownExampleError
from .fixed_point import (
    ContractionSpec,
    IterationTrace,
    PreconditionResult,
    all_pairs,
    banach_tail_bound,
    grid_pairs,
    kannan_step_bound,
    modkannan_bounds,
    picard_solve,
    verify_contraction,
    verify_theta_condition,
)
from .fuzz import FuzzConfig, fuzz_campaign
from .gallery import build_example, run_gallery
from .sequences import SelfMap
from .spaces import AnalyticSpace, AxiomProfile, FiniteSpace, dumps_space, space_from_json_dict

DEFAULT_TOL = 1e-9
DEFAULT_MAX_ITER = 10000
DEFAULT_GRID_N = 41


class _UsageError(Exception):
    pass


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _resolve_space(spec: str):
    """Returns (space, profile-or-None, input digest, display name)."""
    if spec.startswith("gallery:"):
        entry_id = spec.split(":", 1)[1]
        try:
            entry = build_example(entry_id)
        except UnknownExampleError as exc:
            raise _UsageError(str(exc)) from exc
        return entry.space, entry.profile, _sha256(dumps_space(entry.space).encode()), spec
    path = Path(spec)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise _UsageError(f"cannot read {spec}: {exc}") from exc
    try:
        doc = json.loads(raw.decode("utf-8"))
    except json.JSONDecodeError as exc:
        raise _UsageError(f"{spec}: invalid JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    try:
        space = space_from_json_dict(doc)
    except (ValueError, KeyError, TypeError) as exc:
        raise _UsageError(f"{spec}: not a valid space document: {exc}") from exc
    return space, None, _sha256(raw), spec


def _parse_profile(args) -> AxiomProfile | None:
    if args.profile is None:
        return None
    try:
        return AxiomProfile(args.profile, args.s)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc


def _envelope(args, config: dict, digest: str | None, report: dict) -> dict:
    return {
        "tool": "pebms",
        "version": __version__,
        "config": config,
        "input_digest": digest,
        "report": report,
    }


def _print_json(payload: dict) -> None:
    print(json.dumps(payload))


def _print_text_header(config: dict, digest: str | None) -> None:
    """One self-describing line so text reports carry version, config, and input."""
    pairs = " ".join(f"{k}={v}" for k, v in config.items() if k != "subcommand")
    suffix = f" | input sha256:{digest[:16]}" if digest else ""
    print(f"# pebms {__version__} | {config.get('subcommand', '?')} {pairs}{suffix}")


def _reject_csv(args) -> None:
    if args.format == "csv":
        raise _UsageError("csv output applies to solve traces only; use --format json or text")


def _cmd_check(args) -> int:
    _reject_csv(args)
    space, entry_profile, digest, name = _resolve_space(args.space)
    profile = _parse_profile(args) or entry_profile or (
        space.declared_kind if isinstance(space, FiniteSpace) else AxiomProfile.pebm()
    )
    if isinstance(space, FiniteSpace):
        report = check_axioms(space, profile)
    else:
        report = check_axioms_sampled(space, args.grid_n, profile)
    config = {"subcommand": "check", "space": name, "profile": profile.label(), "grid_n": args.grid_n}
    if args.format == "json":
        _print_json(_envelope(args, config, digest, report.to_json_dict()))
    else:
        _print_text_header(config, digest)
        print(f"space: {name}")
        print(f"profile: {profile.label()}")
        print(f"verdict: {report.verdict.upper()}{' (grid-relative evidence)' if report.grid_relative and report.passed else ''}")
        print(f"checks_run: {report.checks_run}")
        print(f"worst_margin: {report.worst_margin:g}")
        for v in report.violations[:10]:
            print(f"  {v.axiom} at {v.witness}: lhs={v.lhs:g} rhs={v.rhs:g} margin={v.margin:g}")
        if len(report.violations) > 10:
            print(f"  ... and {len(report.violations) - 10} more violations")
    return 0 if report.passed else 1


def _parse_map(args, space) -> SelfMap:
    text = args.map
    if text is None:
        raise _UsageError("solve needs --map (an expression in x, or a comma-separated index table)")
    if isinstance(space, FiniteSpace):
        try:
            table = [int(t) for t in text.split(",")]
        except ValueError:
            raise _UsageError("finite spaces take --map as a comma-separated index table, e.g. 0,2,1") from None
        if len(table) != space.n:
            raise _UsageError(f"map table has {len(table)} entries for a {space.n}-point space")
        try:
            return SelfMap.from_table(table)
        except ValueError as exc:
            raise _UsageError(str(exc)) from exc
    try:
        return SelfMap.from_expression(text, space.domain)
    except ValueError as exc:
        raise _UsageError(f"bad map expression: {exc}") from exc


def _parse_x0(args, space):
    if args.x0 is None:
        raise _UsageError("solve needs --x0")
    if isinstance(space, FiniteSpace):
        try:
            label = int(args.x0)
        except ValueError:
            try:
                label = float(args.x0)
            except ValueError:
                label = args.x0
        try:
            return space.index_of(label)
        except DomainError as exc:
            raise _UsageError(str(exc)) from exc
    try:
        return float(args.x0)
    except ValueError:
        raise _UsageError(f"--x0 must be a real number for analytic spaces, got {args.x0!r}") from None


def _cmd_solve(args) -> int:
    space, entry_profile, digest, name = _resolve_space(args.space)
    try:
        spec = ContractionSpec(args.family, args.k)
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    mp = _parse_map(args, space)
    x0 = _parse_x0(args, space)

    profile = _parse_profile(args) or entry_profile or (
        space.declared_kind if isinstance(space, FiniteSpace) else AxiomProfile.pebm()
    )
    if isinstance(space, FiniteSpace):
        axiom_report = check_axioms(space, profile)
        pairs = all_pairs(space)
        theta_sample = np.arange(space.n)
    else:
        axiom_report = check_axioms_sampled(space, args.grid_n, profile)
        pairs = grid_pairs(space, args.grid_n)
        theta_sample = space.grid(args.grid_n)
    contraction = verify_contraction(space, mp, spec, pairs)
    theta_cond = verify_theta_condition(space, mp, spec, x0, horizon=args.horizon, sample=theta_sample)
    preconditions = (
        PreconditionResult(
            "space_axioms",
            axiom_report.passed,
            f"{profile.label()}: {axiom_report.verdict} over {axiom_report.checks_run} checks"
            + (f"; first violation {axiom_report.violations[0].axiom} at {axiom_report.violations[0].witness}"
               if axiom_report.violations else ""),
        ),
        PreconditionResult(
            "contraction_inequality",
            contraction.passed,
            f"worst ratio {contraction.worst_ratio:g} vs k={spec.k:g} ({contraction.mode}, {contraction.pairs_checked} pairs)",
        ),
        PreconditionResult(
            "control_condition",
            theta_cond.passed,
            f"sup {theta_cond.observed_sup:g} vs strict limit {theta_cond.limit:g} ({theta_cond.mode})",
        ),
    )
    preconditions_ok = all(p.verified for p in preconditions)
    if not preconditions_ok:
        failed = ", ".join(p.name for p in preconditions if not p.verified)
        print(f"warning: preconditions failed ({failed}); iterating anyway", file=sys.stderr)

    result = picard_solve(space, mp, x0, tol=args.tol, max_iter=args.max_iter, spec=spec)
    if args.trace_out:
        Path(args.trace_out).write_text(result.trace.to_csv(), encoding="utf-8")

    config = {
        "subcommand": "solve",
        "space": name,
        "map": args.map,
        "family": spec.family,
        "k": spec.k,
        "x0": args.x0,
        "tol": args.tol,
        "max_iter": args.max_iter,
        "grid_n": args.grid_n,
        "horizon": args.horizon,
    }
    report: dict = {
        "converged": result.converged,
        "final_step_dist": result.final_step_dist,
        "preconditions": [p.to_json_dict() for p in preconditions],
        "trace_rows": len(result.trace),
        "trace_out": args.trace_out,
    }
    if result.converged:
        report["certificate"] = result.certificate.with_preconditions(preconditions).to_json_dict()
    if args.format == "json":
        _print_json(_envelope(args, config, digest, report))
    elif args.format == "csv":
        print(result.trace.to_csv(), end="")
    else:
        _print_text_header(config, digest)
        for p in preconditions:
            print(f"precondition {p.name}: {'ok' if p.verified else 'FAILED'} ({p.detail})")
        if result.converged:
            c = result.certificate
            print(
                f"converged: u={c.fixed_point!r} residual={c.residual:g} "
                f"self_distance={c.self_distance:g} iterations={c.iterations}"
            )
        else:
            print(f"no convergence in {args.max_iter} iterations; final step {result.final_step_dist:g}")
        if args.trace_out:
            print(f"trace written to {args.trace_out}")
    if not result.converged:
        return 3
    return 0 if preconditions_ok else 1


def _cmd_gallery(args) -> int:
    _reject_csv(args)
    report = run_gallery(grid_n=args.grid_n, tol=args.tol)
    config = {"subcommand": "gallery", "grid_n": args.grid_n, "tol": args.tol}
    if args.format == "json":
        _print_json(_envelope(args, config, None, report.to_json_dict()))
    else:
        _print_text_header(config, None)
        print(report.summary_table())
    return 0 if report.passed else 1


def _cmd_fuzz(args) -> int:
    _reject_csv(args)
    try:
        config = FuzzConfig(
            trials=args.trials,
            seed=args.seed,
            n_min=args.n_min,
            n_max=args.n_max,
            mutation_factor=args.factor,
        )
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    result = fuzz_campaign(config)
    if args.save_counterexamples:
        outdir = Path(args.save_counterexamples)
        outdir.mkdir(parents=True, exist_ok=True)
        manifest = []
        for idx, ce in enumerate(result.counterexamples):
            fname = f"counterexample_{idx:04d}.json"
            (outdir / fname).write_text(dumps_space(ce.space) + "\n", encoding="utf-8")
            manifest.append({"file": fname, **ce.to_json_dict()})
        (outdir / "manifest.json").write_text(json.dumps(manifest) + "\n", encoding="utf-8")
    cfg = {
        "subcommand": "fuzz",
        "trials": args.trials,
        "seed": args.seed,
        "n_min": args.n_min,
        "n_max": args.n_max,
        "factor": args.factor,
    }
    if args.format == "json":
        _print_json(_envelope(args, cfg, None, result.to_json_dict()))
    else:
        _print_text_header(cfg, None)
        d = result.to_json_dict()
        print(
            f"trials: {d['trials']}  generated pass/fail: {d['generated_pass']}/{d['generated_fail']}  "
            f"mutations caught/missed/impossible: {d['mutations_caught']}/{d['mutations_missed']}/{d['mutations_impossible']}"
        )
        for a in result.anomalies:
            print(f"anomaly: {a}")
        print(f"consistent: {'yes' if result.consistent else 'NO'}")
    return 0 if result.consistent else 1


def _cmd_bound(args) -> int:
    _reject_csv(args)
    config = {"subcommand": "bound", "family": args.family, "k": args.k, "n": args.n, "m": args.m}
    trace = None
    digest = None
    if args.trace:
        try:
            text = Path(args.trace).read_text(encoding="utf-8")
        except OSError as exc:
            raise _UsageError(f"cannot read {args.trace}: {exc}") from exc
        digest = _sha256(text.encode())
        try:
            trace = IterationTrace.from_csv(text)
        except ValueError as exc:
            raise _UsageError(str(exc)) from exc
    try:
        if args.family == "banach":
            if trace is None or args.space is None:
                raise _UsageError("banach bounds need --trace and --space")
            space, _, _, _ = _resolve_space(args.space)
            if isinstance(space, FiniteSpace):
                trace = IterationTrace(
                    tuple(int(x) for x in trace.x), trace.step_dist, trace.self_dist, trace.bound, trace.n_self
                )
            b = banach_tail_bound(trace, space, args.k, args.n, args.m)
            report = {"value": b.value, "terms": list(b.terms), "partial_sums": list(b.partial_sums)}
        elif args.family == "kannan":
            p01 = args.p01 if args.p01 is not None else (trace.step_dist[0] if trace else None)
            if p01 is None:
                raise _UsageError("kannan bounds need --p01 or --trace")
            report = {"value": kannan_step_bound(args.k, args.n, p01), "p01": p01}
        else:
            if trace is None:
                raise _UsageError("modified_kannan bounds need --trace")
            mb = modkannan_bounds(trace, args.k, args.n, args.m)
            report = {"window_bound": mb.window_bound, "step_bound": mb.step_bound}
    except ValueError as exc:
        raise _UsageError(str(exc)) from exc
    if args.format == "json":
        _print_json(_envelope(args, config, digest, report))
    else:
        _print_text_header(config, digest)
        for key, val in report.items():
            print(f"{key}: {val}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pebms", description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    parser.add_argument("--version", action="version", version=f"pebms {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    def add_common(sp):
        sp.add_argument("--format", choices=("json", "csv", "text"), default="text")
        sp.add_argument("--grid-n", dest="grid_n", type=int, default=DEFAULT_GRID_N)
        sp.add_argument("--tol", type=float, default=DEFAULT_TOL)

    p_check = sub.add_parser("check", help="verify a space's axioms")
    p_check.add_argument("space", help="space JSON file or gallery:<id>")
    p_check.add_argument("--profile", choices=("metric", "b_metric", "ebm", "partial_metric", "pbm", "pebm"))
    p_check.add_argument("--s", type=float, default=None, help="coefficient for b_metric / pbm profiles")
    add_common(p_check)
    p_check.set_defaults(func=_cmd_check)

    p_solve = sub.add_parser("solve", help="run Picard iteration with precondition checks")
    p_solve.add_argument("space", help="space JSON file or gallery:<id>")
    p_solve.add_argument("--map", help="self-map: expression in x, or index table for finite spaces")
    p_solve.add_argument("--family", choices=("banach", "kannan", "modified_kannan"), required=True)
    p_solve.add_argument("--k", type=float, required=True)
    p_solve.add_argument("--x0", required=True)
    p_solve.add_argument("--max-iter", dest="max_iter", type=int, default=DEFAULT_MAX_ITER)
    p_solve.add_argument("--horizon", type=int, default=50, help="orbit length for the control-condition check")
    p_solve.add_argument("--trace-out", dest="trace_out", help="write the iteration trace CSV here")
    p_solve.add_argument("--profile", choices=("metric", "b_metric", "ebm", "partial_metric", "pbm", "pebm"))
    p_solve.add_argument("--s", type=float, default=None)
    add_common(p_solve)
    p_solve.set_defaults(func=_cmd_solve)

    p_gallery = sub.add_parser("gallery", help="reproduce all worked examples")
    add_common(p_gallery)
    p_gallery.set_defaults(func=_cmd_gallery)

    p_fuzz = sub.add_parser("fuzz", help="generator/checker round-trip campaign")
    p_fuzz.add_argument("--trials", type=int, default=100)
    p_fuzz.add_argument("--seed", type=int, default=0)
    p_fuzz.add_argument("--n-min", dest="n_min", type=int, default=2)
    p_fuzz.add_argument("--n-max", dest="n_max", type=int, default=8)
    p_fuzz.add_argument("--factor", type=float, default=0.9)
    p_fuzz.add_argument("--save-counterexamples", dest="save_counterexamples", help="directory for replayable space files")
    add_common(p_fuzz)
    p_fuzz.set_defaults(func=_cmd_fuzz)

    p_bound = sub.add_parser("bound", help="evaluate error bounds from a saved trace")
    p_bound.add_argument("--family", choices=("banach", "kannan", "modified_kannan"), required=True)
    p_bound.add_argument("--trace", help="trace CSV written by solve")
    p_bound.add_argument("--space", help="space JSON or gallery:<id> (banach only)")
    p_bound.add_argument("--k", type=float, required=True)
    p_bound.add_argument("--n", type=int, required=True)
    p_bound.add_argument("--m", type=int, default=0)
    p_bound.add_argument("--p01", type=float, default=None)
    add_common(p_bound)
    p_bound.set_defaults(func=_cmd_bound)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
