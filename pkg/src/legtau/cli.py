"""Batch front end: solve / sweep / bench / verify.

Output files are deterministic for a fixed configuration and precision; the
only nondeterministic columns are the wall-clock runtimes in sweep artifacts.
"""

from __future__ import annotations

import argparse
import csv
import sys
from fractions import Fraction
from pathlib import Path

import mpmath as mp

from . import analysis, checks
from .errors import LegtauError
from .fracops import FracOrder
from .precision import get_precision, nstr_sci, set_precision
from .probfile import load_bundled, parse_problem_file
from .tausolver import solve


def _fmt(value, digits=None):
    return nstr_sci(value, digits or get_precision())


def _parse_n_list(text):
    try:
        return [int(part) for part in str(text).split(",") if part.strip()]
    except ValueError:
        raise SystemExit(f"error: bad --N value {text!r} (want an int or comma list)")


def _add_common(parser, need_problem):
    if need_problem:
        parser.add_argument("--problem", required=True, help="problem definition file")
    parser.add_argument("--N", default=None, help="truncation degree (or comma list)")
    parser.add_argument("--precision", type=int, default=50, help="decimal digits (>= 30)")
    parser.add_argument("--tol", default=None, help="Newton residual tolerance")
    parser.add_argument("--out", default=".", help="output directory")
    parser.add_argument("--format", choices=("csv", "json"), default="csv",
                        help="table format for emitted artifacts")


def _write_table(path: Path, header, rows, fmt):
    if fmt == "json":
        import json
        payload = [dict(zip(header, row)) for row in rows]
        path.with_suffix(".json").write_text(json.dumps(payload, indent=2, sort_keys=True))
        return path.with_suffix(".json")
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _solution_rows(report, problem, grid=101):
    rows = []
    digits = get_precision()
    for i in range(grid):
        x = mp.mpf(i) / (grid - 1)
        y = report.evaluate(x)
        row = [mp.nstr(x, 12), _fmt(y, digits)]
        if problem.exact_solution is not None:
            ex = problem.exact_solution(x)
            row += [_fmt(ex, digits), _fmt(abs(y - ex), digits)]
        rows.append(row)
    header = ["x", "y_N"] + (["y_exact", "abs_error"] if problem.exact_solution else [])
    return header, rows


def cmd_solve(ns) -> int:
    set_precision(ns.precision)
    problem = parse_problem_file(ns.problem)
    n_values = _parse_n_list(ns.N) if ns.N else None
    if not n_values or len(n_values) != 1:
        raise SystemExit("error: solve needs exactly one --N")
    tol = mp.mpf(ns.tol) if ns.tol else None
    report = solve(problem, n_values[0], tol=tol)
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = problem.name or Path(ns.problem).stem
    header, rows = _solution_rows(report, problem)
    table = _write_table(out / f"{stem}_solution.csv", header, rows, ns.format)
    (out / f"{stem}_report.json").write_text(report.to_json())
    print(f"wrote {table} and {out / (stem + '_report.json')}")
    if not report.converged:
        print("solver did not converge", file=sys.stderr)
        return 1
    return 0


def cmd_sweep(ns) -> int:
    set_precision(ns.precision)
    problem = parse_problem_file(ns.problem)
    n_values = _parse_n_list(ns.N) if ns.N else [2, 4, 8, 16]
    metric = ns.metric
    if metric == "auto":
        metric = analysis.MAX_ERROR if problem.exact_solution else analysis.INTEGRAL_RESIDUAL
    tol = mp.mpf(ns.tol) if ns.tol else None
    kwargs = {"tol": tol} if tol else {}
    report = analysis.convergence_sweep(problem, sorted(n_values), metric, **kwargs)
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = problem.name or Path(ns.problem).stem
    rows = []
    for row in report.rows:
        rows.append([row.degree,
                     _fmt(row.value) if row.value is not None else "",
                     f"{row.runtime:.3f}",
                     row.error or ""])
    table = _write_table(out / f"{stem}_sweep.csv",
                         ["N", metric, "runtime_seconds", "error"], rows, ns.format)
    fit_lines = [f"decay: {report.decay_label}"]
    if report.exponential_fit:
        fit_lines.append(
            f"log(value) ~ {mp.nstr(report.exponential_fit[0], 6)} * N + c "
            f"(corr {mp.nstr(report.exponential_fit[2], 6)})")
    if report.algebraic_fit:
        fit_lines.append(
            f"log(value) ~ {mp.nstr(report.algebraic_fit[0], 6)} * log N + c "
            f"(corr {mp.nstr(report.algebraic_fit[2], 6)})")
    print(f"wrote {table}")
    for line in fit_lines:
        print(line)
    return 0 if all(r.error is None for r in report.rows) else 1


def _reference_rows(name):
    path = Path(__file__).parent / "data" / name
    with open(path) as fh:
        reader = csv.reader(fh)
        header = next(reader)
        return header, list(reader)


def _bench_exact_recovery(out, fmt, n_override, tol):
    status = 0
    for name, default_n in (("example1", 2), ("example2", 2)):
        problem = load_bundled(name)
        n = n_override or default_n
        report = solve(problem, n, tol=tol)
        header, rows = _solution_rows(report, problem, grid=11)
        _write_table(out / f"{name}_solution.csv", header, rows, fmt)
        (out / f"{name}_report.json").write_text(report.to_json())
        if not report.converged:
            status = 1
        print(f"bench {name}: N={n} converged={report.converged}")
    return status


def _bench_alpha_table(out, fmt, n_override, tol):
    problem = load_bundled("example3")
    n = n_override or 10
    ref_header, ref_rows = _reference_rows("table1_reference.csv")
    alphas = (Fraction(1, 4), Fraction(1, 2), Fraction(3, 4), 1)
    columns = {}
    for alpha in alphas:
        spec = problem.replace(order=FracOrder(alpha),
                               name=f"example3[alpha={alpha}]")
        report = solve(spec, n, tol=tol)
        columns[str(alpha)] = report
        print(f"bench example3: alpha={alpha} N={n} converged={report.converged}")
    header = ["t"]
    for alpha in alphas:
        header += [f"otm_alpha_{alpha}", f"reference_alpha_{alpha}", f"deviation_alpha_{alpha}"]
    rows = []
    for ref in ref_rows:
        t = mp.mpf(ref[0])
        row = [ref[0]]
        for idx, alpha in enumerate(alphas):
            ours = columns[str(alpha)].evaluate(t)
            reference = mp.mpf(ref[idx + 1])
            row += [_fmt(ours), ref[idx + 1], _fmt(abs(ours - reference))]
        rows.append(row)
    _write_table(out / "example3_alpha_table.csv", header, rows, fmt)
    return 0


def _bench_error_sweep(out, fmt, tol):
    problem = load_bundled("example3").replace(order=FracOrder(Fraction(1, 2)))
    degrees = [2, 4, 8, 16]
    ref = {int(row[0]): row[1] for row in _reference_rows("table2_reference.csv")[1]}
    ref_n = 32
    ref_report = solve(problem, ref_n, tol=tol)
    import time as _time
    rows = []
    values = []
    for n in degrees:
        t0 = _time.perf_counter()
        rep = solve(problem, n, tol=tol)
        residual = analysis.integral_equation_residual(rep.y_leg, problem)
        runtime = _time.perf_counter() - t0
        self_cmp = analysis.sup_norm(
            lambda x: rep.evaluate(x) - ref_report.evaluate(x), grid=513)
        values.append(residual)
        rows.append([n, _fmt(residual), _fmt(self_cmp), ref.get(n, ""),
                     f"{runtime:.3f}"])
    _write_table(out / "example3_error_sweep.csv",
                 ["N", "integral_residual", f"sup_diff_vs_N{ref_n}",
                  "reported_reference", "runtime_seconds"], rows, fmt)
    decreasing = all(b < a for a, b in zip(values, values[1:]))
    print(f"bench example3 sweep: integral residual strictly decreasing: {decreasing}")
    return 0 if decreasing else 1


def _bench_exponential(out, fmt, n_override, tol):
    problem = load_bundled("example4")
    degrees = [n_override] if n_override else [8, 16, 32]
    reports = {}
    for n in degrees:
        reports[n] = solve(problem, n, tol=tol)
        print(f"bench example4: N={n} converged={reports[n].converged}")
    header = ["t", "exact"] + [f"otm_N{n}" for n in degrees]
    rows = []
    for i in range(11):
        t = mp.mpf(i) / 10
        row = [mp.nstr(t, 3), _fmt(problem.exact_solution(t))]
        row += [_fmt(reports[n].evaluate(t)) for n in degrees]
        rows.append(row)
    _write_table(out / "example4_solution_table.csv", header, rows, fmt)
    return 0 if all(r.converged for r in reports.values()) else 1


def cmd_bench(ns) -> int:
    set_precision(ns.precision)
    out = Path(ns.out)
    out.mkdir(parents=True, exist_ok=True)
    n_values = _parse_n_list(ns.N) if ns.N else None
    n_override = n_values[0] if n_values else None
    tol = mp.mpf(ns.tol) if ns.tol else None
    status = 0
    status |= _bench_exact_recovery(out, ns.format, n_override, tol)
    status |= _bench_alpha_table(out, ns.format, n_override, tol)
    if not ns.quick:
        status |= _bench_error_sweep(out, ns.format, tol)
        status |= _bench_exponential(out, ns.format, n_override, tol)
    return status


def cmd_verify(ns) -> int:
    set_precision(ns.precision)
    results = checks.run_all(fast=ns.fast)
    width = max(len(r.name) for r in results)
    failed = 0
    for r in results:
        tag = "PASS" if r.passed else "FAIL"
        print(f"{tag}  {r.name.ljust(width)}  {r.detail}")
        failed += 0 if r.passed else 1
    print(f"{len(results) - failed}/{len(results)} checks passed at precision {get_precision()}")
    return 0 if failed == 0 else 1


def build_parser():
    parser = argparse.ArgumentParser(
        prog="legtau",
        description="Spectral Tau solver for nonlinear Fredholm integro-differential "
                    "equations of fractional order on the shifted Legendre basis.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve one problem at one degree")
    _add_common(p_solve, need_problem=True)
    p_solve.set_defaults(func=cmd_solve)

    p_sweep = sub.add_parser("sweep", help="convergence sweep over degrees")
    _add_common(p_sweep, need_problem=True)
    p_sweep.add_argument("--metric", choices=("auto", analysis.MAX_ERROR,
                                              analysis.INTEGRAL_RESIDUAL),
                         default="auto")
    p_sweep.set_defaults(func=cmd_sweep)

    p_bench = sub.add_parser("bench", help="run the bundled benchmark problems")
    _add_common(p_bench, need_problem=False)
    p_bench.add_argument("--quick", action="store_true",
                         help="skip the slow sweep and exponential-kernel tables")
    p_bench.set_defaults(func=cmd_bench)

    p_verify = sub.add_parser("verify", help="run the identity and property suites")
    p_verify.add_argument("--precision", type=int, default=50)
    p_verify.add_argument("--fast", action="store_true", help="smaller sweeps")
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except LegtauError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
