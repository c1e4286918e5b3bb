"""Command-line front end: ``hsfrac {eval-kernel,solve,verify}``."""

from __future__ import annotations

import argparse
import csv
import io
import sys
import time

import numpy as np

from . import _backend
from .errors import HsfracError
from .kernels import KernelId
from .params import Params
from .problem import EvalReport, ProblemSpec, SpecError, dumps
from .quadrature import DEFAULT_CONFIG

KERNEL_ALIASES = {"green": "green_halfspace", "poisson": "poisson_nonlocal", "ball": "green_ball"}
MAX_FAILURES_SHOWN = 10


def _kernel_id(text: str) -> KernelId:
    tag, sep, idx = text.partition(":")
    return KernelId.parse(KERNEL_ALIASES.get(tag, tag) + sep + idx)


def read_points(path: str, N: int) -> np.ndarray:
    """Rows x1..xN,y1..yN; a header line and blank lines are skipped."""
    with (sys.stdin if path == "-" else open(path, newline="")) as fh:
        rows = []
        for lineno, row in enumerate(csv.reader(fh), start=1):
            if not row or all(not c.strip() for c in row):
                continue
            try:
                vals = [float(c) for c in row]
            except ValueError:
                if not rows and lineno == 1:
                    continue  # header
                raise SpecError(f"{path}:{lineno}: non-numeric entry in {row}") from None
            if len(vals) != 2 * N:
                raise SpecError(f"{path}:{lineno}: expected {2 * N} columns (x then y), got {len(vals)}")
            rows.append(vals)
    return np.array(rows, dtype=float).reshape(-1, 2 * N)


def cmd_eval_kernel(args) -> int:
    params = Params(args.N, args.m, args.sigma)
    kid = _kernel_id(args.kernel)
    kid.validate(params)
    pts = read_points(args.points, params.N)
    N = params.N
    vals = [kid.evaluate(row[:N], row[N:], params) for row in pts]
    if args.format == "json":
        doc = {
            "schema_version": 1,
            "kernel": str(kid),
            "params": params.as_dict(),
            "config": DEFAULT_CONFIG.as_dict(),
            "rows": [{"x": r[:N].tolist(), "y": r[N:].tolist(), "value": v} for r, v in zip(pts, vals)],
        }
        text = dumps(doc)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(N)] + [f"y{i + 1}" for i in range(N)] + ["value"])
        for r, v in zip(pts, vals):
            w.writerow([repr(float(t)) for t in r] + [repr(float(v))])
        text = buf.getvalue()
    _emit(text, args.out)
    return 0


def _emit(text: str, out) -> None:
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w") as fh:
            fh.write(text)


def _residuals(u, spec: ProblemSpec, pts: np.ndarray):
    from .fraclap import frac_laplacian_at

    params, cfg = spec.params, spec.cfg
    f = spec.f
    fnorm = f.sup_norm() if f is not None and f.terms else 1.0
    tol = 1e-2 * fnorm
    rows = []
    for x in pts:
        if not x[0] > 0.0:
            continue
        try:
            lap = frac_laplacian_at(u, x, params, cfg)[0]
        except HsfracError as exc:
            rows.append({"x": x.tolist(), "error": f"{type(exc).__name__}: {exc}"})
            continue
        target = float(f.values(x[None, :])[0]) if f is not None else 0.0
        rows.append({"x": x.tolist(), "lap": lap, "f": target, "abs_error": abs(lap - target), "tol": tol})
    errs = [r["abs_error"] for r in rows if "abs_error" in r]
    return {
        "tol": tol,
        "points": rows,
        "max_abs_error": max(errs) if errs else None,
        "passed": bool(errs) and all(e <= tol for e in errs) and len(errs) == len(rows),
    }


def _traces(u, spec: ProblemSpec, pts: np.ndarray):
    from .solvers import BumpSum
    from .transforms import trace_D

    params = spec.params
    N, m = params.N, params.m
    h = spec.h or tuple(BumpSum.empty("boundary", N) for _ in range(m + 1))
    tangential = sorted({tuple(x[1:]) for x in pts})
    rows = []
    for zp in tangential:
        for j in range(m + 1):
            ref = float(h[j].boundary_values(np.array([zp]).reshape(1, N - 1))[0]) if N > 1 else float(h[j].values(np.zeros((1, 1)))[0])
            tol = 1e-3 * max(h[j].sup_norm(), 1e-300) if h[j].terms else 1e-3
            try:
                val = trace_D(u, (0.0,) + zp, j, params.sigma, spec.cfg)
            except HsfracError as exc:
                rows.append({"z": list(zp), "j": j, "error": f"{type(exc).__name__}: {exc}"})
                continue
            rows.append({"z": list(zp), "j": j, "trace": val, "h": ref, "abs_error": abs(val - ref), "tol": tol})
    return {"points": rows, "passed": all("abs_error" in r and r["abs_error"] <= r["tol"] for r in rows)}


def cmd_solve(args) -> int:
    from .solvers import evaluate_grid, solve_full

    t0 = time.perf_counter()
    spec = ProblemSpec.load(args.spec)
    params, cfg = spec.params, spec.cfg
    u = solve_full(spec.f, spec.g, spec.h, params, cfg)
    pts = spec.points()
    vals = evaluate_grid(u, pts) if len(pts) else np.zeros(0)
    t1 = time.perf_counter()
    report = EvalReport(
        "solve",
        {"spec": spec.to_dict(), "quad": cfg.as_dict(), "backend": _backend.NAME},
    )
    report.add("solution", {"kind": u.kind if hasattr(u, "kind") else "superposition", "tol": {"abs": cfg.abs_tol, "rel": cfg.rel_tol}})
    report.add("values", [{"x": x.tolist(), "u": float(v)} for x, v in zip(pts, vals)])
    passed = True
    timings = {"solve": t1 - t0}
    if args.check_residual:
        res = _residuals(u, spec, pts)
        report.add("residual", res)
        passed &= res["passed"]
        timings["residual"] = time.perf_counter() - t1
    if args.check_traces:
        t2 = time.perf_counter()
        tr = _traces(u, spec, pts)
        report.add("traces", tr)
        passed &= tr["passed"]
        timings["traces"] = time.perf_counter() - t2
    if args.check_residual or args.check_traces:
        report.passed = bool(passed)
    if args.timings:
        report.timings = timings
    _emit(report.dumps(), args.out)
    if args.csv:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([f"x{i + 1}" for i in range(params.N)] + ["u"])
        for x, v in zip(pts, vals):
            w.writerow([repr(float(t)) for t in x] + [repr(float(v))])
        _emit(buf.getvalue(), args.csv)
    return 0 if report.passed in (None, True) else 1


def cmd_verify(args) -> int:
    from .suites import run_suite

    t0 = time.perf_counter()
    s_values = tuple(args.s) if args.s else None
    checks = run_suite(args.suite, fast=args.fast, seed=args.seed, cfg=DEFAULT_CONFIG, s_values=s_values)
    failures = [c for c in checks if not c.passed]
    report = EvalReport(
        "verify",
        {"suite": args.suite, "fast": args.fast, "seed": args.seed, "quad": DEFAULT_CONFIG.as_dict(), "backend": _backend.NAME},
    )
    report.add("checks", [c.as_dict() for c in checks])
    report.add("summary", {"total": len(checks), "failed": len(failures)})
    report.passed = not failures
    if args.timings:
        report.timings = {"verify": time.perf_counter() - t0}
    if args.out:
        _emit(report.dumps(), args.out)
    by_suite = {}
    for c in checks:
        ok, tot = by_suite.get(c.suite, (0, 0))
        by_suite[c.suite] = (ok + c.passed, tot + 1)
    for name, (ok, tot) in by_suite.items():
        print(f"{name}: {ok}/{tot} passed", file=sys.stderr)
    for c in failures[:MAX_FAILURES_SHOWN]:
        print(f"FAIL {c.suite}/{c.name}: value={c.value!r} reference={c.reference!r} {c.measure} error={c.error:.3e} > tol={c.tol:.1e}", file=sys.stderr)
    if len(failures) > MAX_FAILURES_SHOWN:
        print(f"... and {len(failures) - MAX_FAILURES_SHOWN} more failures", file=sys.stderr)
    return 0 if not failures else 1


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="hsfrac", description="Half-space problems for the fractional Laplacian.")
    sub = ap.add_subparsers(dest="command", required=True)

    ek = sub.add_parser("eval-kernel", help="tabulate a kernel on point pairs")
    ek.add_argument("--kernel", required=True, help="green_halfspace, green_ball, poisson_nonlocal, boundary:K, martin, reflected_P")
    ek.add_argument("--N", type=int, required=True)
    ek.add_argument("--m", type=int, required=True)
    ek.add_argument("--sigma", type=float, required=True)
    ek.add_argument("--points", required=True, help="CSV with columns x1..xN,y1..yN ('-' for stdin)")
    ek.add_argument("--format", choices=("csv", "json"), default="csv")
    ek.add_argument("--out", default=None)
    ek.set_defaults(func=cmd_eval_kernel)

    so = sub.add_parser("solve", help="evaluate the solution of a problem file on its grid")
    so.add_argument("--spec", required=True)
    so.add_argument("--out", required=True)
    so.add_argument("--csv", default=None, help="also write the point table as CSV")
    so.add_argument("--check-residual", action="store_true")
    so.add_argument("--check-traces", action="store_true")
    so.add_argument("--timings", action="store_true", help="include wall-clock timings (breaks byte-identical output)")
    so.set_defaults(func=cmd_solve)

    ve = sub.add_parser("verify", help="run a verification suite")
    ve.add_argument("--suite", choices=("identities", "harmonic", "kelvin", "kernels", "solvers", "all"), required=True)
    ve.add_argument("--fast", action="store_true")
    ve.add_argument("--seed", type=int, default=0)
    ve.add_argument("--s", type=float, nargs="+", help="orders for the harmonic suite")
    ve.add_argument("--out", default=None, help="write the JSON report here")
    ve.add_argument("--timings", action="store_true")
    ve.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (HsfracError, OSError) as exc:
        print(f"hsfrac {args.command}: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
