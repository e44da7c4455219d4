"""Command-line front end.

Subcommands::

    gen       write a benchmark problem to a JSON file
    solve     doubling solver on a problem
    sushi     shifted solver on a problem
    diagnose  criticality metrics of a problem
    bench     grid of (plain vs shifted) runs, one row per cell

Exit codes: 0 success, 2 solver breakdown, 3 no convergence,
4 classification failure (not an M-matrix equation, or ambiguous spectrum),
5 input/output error.  In JSON mode errors are reported as
{"error": <code-name>, "message": ...} on standard output; a human-readable
message always goes to standard error.
"""

import argparse
import csv
import io
import json
import sys

import numpy as np

from . import __version__
from .core import NareProblem, build_h, build_m, classify_mmatrix, gamma_star
from .diagnostics import delta_central, gap_of, report_for
from .errors import (
    Breakdown,
    ClassificationAmbiguous,
    InitSingular,
    InvalidProblem,
    NarekitError,
    SingularMatrix,
)
from .sda import SdaConfig, sda_solve, trace_writer
from .shift import SushiOptions, sushi_report, sushi_solve
from .problems import (
    RandomMnareSpec,
    TransportSpec,
    random_mnare,
    transport_problem,
)

EXIT_OK = 0
EXIT_BREAKDOWN = 2
EXIT_NO_CONVERGENCE = 3
EXIT_CLASSIFICATION = 4
EXIT_IO = 5

_EXIT_NAMES = {
    EXIT_BREAKDOWN: "breakdown",
    EXIT_NO_CONVERGENCE: "no-convergence",
    EXIT_CLASSIFICATION: "classification",
    EXIT_IO: "io",
}


class _CliFailure(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _add_source_args(sub):
    sub.add_argument("--problem", help="path to a problem JSON file")
    sub.add_argument("--family", choices=["transport", "random"],
                     help="generate the problem instead of loading it")
    sub.add_argument("--n", type=int, help="problem size for --family")
    sub.add_argument("--beta", type=float,
                     help="transport closeness parameter: (alpha, c) = (beta, 1-beta)")
    sub.add_argument("--alpha", type=float, help="family parameter alpha")
    sub.add_argument("--c", type=float, help="transport parameter c")
    sub.add_argument("--seed", type=int, default=0, help="seed for --family random")


def _add_solver_args(sub):
    sub.add_argument("--tol", type=float, default=1e-15)
    sub.add_argument("--max-steps", type=int, default=60)
    sub.add_argument("--gamma", type=float, help="Cayley parameter override")
    sub.add_argument("--force", action="store_true",
                     help="skip the M-matrix classification guard")
    sub.add_argument("--trace", help="write per-step JSON lines to this file")


def _add_output_args(sub):
    sub.add_argument("--format", choices=["json", "csv", "table"], default="json")
    sub.add_argument("--output", help="write the report here instead of stdout")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="narekit",
        description="Minimal nonnegative solutions of nonsymmetric algebraic "
                    "Riccati equations by doubling, with subspace-shift "
                    "acceleration for close-to-critical problems.",
    )
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    subs = parser.add_subparsers(dest="command", required=True)

    gen = subs.add_parser("gen", help="generate a benchmark problem")
    _add_source_args(gen)
    gen.add_argument("--out", required=True, help="output JSON path")

    solve = subs.add_parser("solve", help="doubling solver")
    _add_source_args(solve)
    _add_solver_args(solve)
    _add_output_args(solve)
    solve.add_argument("--save-solution", help="write X to this JSON path")

    sushi = subs.add_parser("sushi", help="subspace-shifted solver")
    _add_source_args(sushi)
    _add_solver_args(sushi)
    _add_output_args(sushi)
    sushi.add_argument("--k", type=int, help="central subspace dimension override")
    sushi.add_argument("--s", type=float, help="shift magnitude override")
    sushi.add_argument("--save-solution", help="write X to this JSON path")

    diag = subs.add_parser("diagnose", help="criticality metrics")
    _add_source_args(diag)
    _add_output_args(diag)
    diag.add_argument("--gamma", type=float, help="Cayley parameter override")

    bench = subs.add_parser("bench", help="plain-vs-shifted grid")
    bench.add_argument("--family", choices=["transport", "random"],
                       default="transport")
    bench.add_argument("--sizes", default="32,128",
                       help="comma-separated problem sizes")
    bench.add_argument("--params", default="1e-3,1e-6,1e-12",
                       help="comma-separated beta (transport) or alpha (random)")
    bench.add_argument("--seeds", default="0",
                       help="comma-separated seeds (random family only)")
    bench.add_argument("--tol", type=float, default=1e-15)
    bench.add_argument("--max-steps", type=int, default=60)
    bench.add_argument("--skip-delta", action="store_true",
                       help="omit the (eigenvalue-based) delta column")
    _add_output_args(bench)
    return parser


def _load_problem(args) -> NareProblem:
    has_file = getattr(args, "problem", None) is not None
    has_family = getattr(args, "family", None) is not None
    if has_file == has_family:
        raise _CliFailure(EXIT_IO, "give exactly one of --problem or --family")
    if has_file:
        try:
            return NareProblem.load(args.problem)
        except (OSError, json.JSONDecodeError, KeyError, InvalidProblem) as exc:
            raise _CliFailure(EXIT_IO, f"cannot load {args.problem}: {exc}")
    return _generate(args.family, args.n, beta=args.beta, alpha=args.alpha,
                     c=args.c, seed=args.seed)


def _generate(family, n, beta=None, alpha=None, c=None, seed=0):
    if n is None:
        raise _CliFailure(EXIT_IO, "--family requires --n")
    try:
        if family == "transport":
            if beta is not None:
                spec = TransportSpec.near_critical(n, beta)
            elif alpha is not None and c is not None:
                spec = TransportSpec(n=n, alpha=alpha, c=c)
            else:
                raise _CliFailure(
                    EXIT_IO, "transport needs --beta or both --alpha and --c")
            return transport_problem(spec)
        if alpha is None:
            raise _CliFailure(EXIT_IO, "random family needs --alpha")
        return random_mnare(RandomMnareSpec(n=n, alpha=alpha, seed=seed))
    except InvalidProblem as exc:
        raise _CliFailure(EXIT_IO, str(exc))


def _classification_guard(p, force):
    if force:
        return
    if not classify_mmatrix(build_m(p)).is_mmatrix():
        raise _CliFailure(
            EXIT_CLASSIFICATION,
            "problem is not M-matrix-structured (rerun with --force to override)",
        )


def _emit(args, payload, rows=None):
    """Write the report in the requested format.

    rows, when given, is (header, list-of-value-lists) used by csv/table;
    json always gets the full payload.
    """
    if args.format == "json":
        text = json.dumps(payload, indent=2, sort_keys=True) + "\n"
    elif rows is None:
        header = sorted(payload)
        rows = (header, [[payload[k] for k in header]])
        text = _format_rows(args.format, *rows)
    else:
        text = _format_rows(args.format, *rows)
    if args.output:
        try:
            with open(args.output, "w") as fh:
                fh.write(text)
        except OSError as exc:
            raise _CliFailure(EXIT_IO, str(exc))
    else:
        sys.stdout.write(text)


def _format_rows(fmt, header, rows):
    cells = [[_cell(v) for v in row] for row in rows]
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(cells)
        return buf.getvalue()
    widths = [max(len(h), *(len(r[i]) for r in cells)) if cells else len(h)
              for i, h in enumerate(header)]
    lines = ["  ".join(h.rjust(w) for h, w in zip(header, widths))]
    for row in cells:
        lines.append("  ".join(v.rjust(w) for v, w in zip(row, widths)))
    return "\n".join(lines) + "\n"


def _cell(v):
    if isinstance(v, float):
        return f"{v:.6g}"
    return str(v)


def _open_trace(args):
    if getattr(args, "trace", None) is None:
        return None, None
    try:
        fh = open(args.trace, "w")
    except OSError as exc:
        raise _CliFailure(EXIT_IO, str(exc))
    return trace_writer(fh), fh


def cmd_gen(args):
    p = _load_problem_for_gen(args)
    try:
        p.save(args.out)
    except OSError as exc:
        raise _CliFailure(EXIT_IO, str(exc))
    return EXIT_OK


def _load_problem_for_gen(args):
    if args.family is None:
        raise _CliFailure(EXIT_IO, "gen requires --family")
    return _generate(args.family, args.n, beta=args.beta, alpha=args.alpha,
                     c=args.c, seed=args.seed)


def cmd_solve(args):
    p = _load_problem(args)
    _classification_guard(p, args.force)
    trace, fh = _open_trace(args)
    cfg = SdaConfig(gamma=args.gamma, tol=args.tol,
                    max_steps=args.max_steps, trace=trace)
    try:
        outcome = sda_solve(p, cfg)
    finally:
        if fh is not None:
            fh.close()
    report = outcome.report()
    report["schema"] = f"narekit-solve/{__version__}"
    _emit(args, report)
    if args.save_solution:
        _save_solution(args.save_solution, outcome.X)
    return EXIT_OK


def cmd_sushi(args):
    p = _load_problem(args)
    trace, fh = _open_trace(args)
    opts = SushiOptions(k=args.k, s=args.s, tol=args.tol,
                        max_steps=args.max_steps, force=args.force, trace=trace)
    try:
        solution, cs, plan, outcome = sushi_solve(p, opts)
    except InvalidProblem as exc:
        raise _CliFailure(EXIT_CLASSIFICATION, str(exc))
    finally:
        if fh is not None:
            fh.close()
    report = sushi_report(solution, cs, plan, outcome)
    report["schema"] = f"narekit-sushi/{__version__}"
    _emit(args, report)
    if args.save_solution:
        _save_solution(args.save_solution, solution.X)
    return EXIT_OK


def _save_solution(path, x):
    try:
        with open(path, "w") as fh:
            json.dump({"X": np.asarray(x).tolist()}, fh)
    except OSError as exc:
        raise _CliFailure(EXIT_IO, str(exc))


def cmd_diagnose(args):
    p = _load_problem(args)
    h = build_h(p)
    gamma = args.gamma if args.gamma is not None else gamma_star(p)
    report = report_for(h, gamma)
    payload = json.loads(report.to_json())
    payload["gamma"] = gamma
    payload["classification"] = classify_mmatrix(build_m(p)).tag
    payload["schema"] = f"narekit-diagnose/{__version__}"
    if args.format == "table":
        sys.stdout.write(report.to_table() + "\n")
        return EXIT_OK
    _emit(args, payload)
    return EXIT_OK


BENCH_HEADER = ["n", "param", "seed", "gap", "delta", "sda_its", "sda_res",
                "sushi_its", "orth_its", "sushi_res"]


def _bench_cell(family, n, param, seed, tol, max_steps, skip_delta):
    if family == "transport":
        p = transport_problem(TransportSpec.near_critical(n, param))
    else:
        p = random_mnare(RandomMnareSpec(n=n, alpha=param, seed=seed))
    h = build_h(p)
    row = {"n": n, "param": param, "seed": seed if family == "random" else ""}
    try:
        row["gap"] = gap_of(h)
    except NarekitError as exc:
        row["gap"] = f"error:{type(exc).__name__}"
    try:
        plain = sda_solve(p, SdaConfig(tol=tol, max_steps=max_steps))
        row["sda_its"] = plain.steps
        row["sda_res"] = plain.residual
    except NarekitError as exc:
        row["sda_its"] = row["sda_res"] = f"error:{type(exc).__name__}"
    try:
        solution, cs, _, outcome = sushi_solve(
            p, SushiOptions(tol=tol, max_steps=max_steps))
        row["sushi_its"] = outcome.steps
        row["orth_its"] = cs.inv_iter_steps
        row["sushi_res"] = solution.residual
        if skip_delta:
            row["delta"] = ""
        else:
            try:
                row["delta"] = delta_central(h, cs.central_eigs)
            except NarekitError as exc:
                row["delta"] = f"error:{type(exc).__name__}"
    except NarekitError as exc:
        tag = f"error:{type(exc).__name__}"
        row["sushi_its"] = row["orth_its"] = row["sushi_res"] = tag
        row["delta"] = "" if skip_delta else tag
    return [row[k] for k in BENCH_HEADER]


def cmd_bench(args):
    try:
        sizes = [int(v) for v in args.sizes.split(",") if v]
        params = [float(v) for v in args.params.split(",") if v]
        seeds = [int(v) for v in args.seeds.split(",") if v]
    except ValueError as exc:
        raise _CliFailure(EXIT_IO, f"bad grid specification: {exc}")
    seeds = seeds if args.family == "random" else [0]
    rows = [
        _bench_cell(args.family, n, param, seed, args.tol, args.max_steps,
                    args.skip_delta)
        for n in sizes
        for param in params
        for seed in seeds
    ]
    payload = {
        "schema": f"narekit-bench/{__version__}",
        "header": BENCH_HEADER,
        "rows": rows,
    }
    fmt_args = args
    if args.format == "json":
        _emit(fmt_args, payload)
    else:
        _emit(fmt_args, payload, rows=(BENCH_HEADER, rows))
    return EXIT_OK


_COMMANDS = {
    "gen": cmd_gen,
    "solve": cmd_solve,
    "sushi": cmd_sushi,
    "diagnose": cmd_diagnose,
    "bench": cmd_bench,
}


def _error_exit(args, code, message):
    sys.stderr.write(f"narekit: {message}\n")
    if getattr(args, "format", None) == "json":
        sys.stdout.write(json.dumps(
            {"error": _EXIT_NAMES.get(code, "error"), "message": message}
        ) + "\n")
    return code


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except _CliFailure as exc:
        return _error_exit(args, exc.code, str(exc))
    except (Breakdown, InitSingular, SingularMatrix) as exc:
        return _error_exit(args, EXIT_BREAKDOWN, str(exc))
    except (ClassificationAmbiguous, InvalidProblem) as exc:
        return _error_exit(args, EXIT_CLASSIFICATION, str(exc))
    except NarekitError as exc:
        # remaining library failures are iteration/pipeline breakdowns
        return _error_exit(args, EXIT_NO_CONVERGENCE, str(exc))


if __name__ == "__main__":
    sys.exit(main())
