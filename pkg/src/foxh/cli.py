"""Command-line front end.

Exit codes: 0 success, 1 verification failure, 2 parse or usage error,
3 numeric failure, 4 parameter out of range.
"""
from __future__ import annotations

import argparse
import csv
import enum
import io
import math
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from .hcore import PoleMergeError, parse_hparams, parse_number, validate
from .heval import (
    ContourError,
    EvalDomainError,
    NonConvergenceError,
    default_threads,
    eval_auto,
    eval_contour,
    eval_series_left,
    eval_series_right,
)
from .hrewrite import (
    HExpr,
    RewriteError,
    cancel_first_lower_last_upper,
    cancel_first_upper_last_lower,
    derivative_lift,
    evaluate,
    hankel_map,
    laplace_map,
    power_shift,
    reflect,
    rescale,
    times,
)
from .kernel import (
    KernelPoint,
    KernelRangeError,
    QuadratureError,
    asymptotic_regime,
    g_eval,
)
from .mittag import ml_neg, ml_route
from .positivity import classify, full_report
from .specfun import GammaPoleError

EXIT_OK = 0
EXIT_VERIFY = 1
EXIT_USAGE = 2
EXIT_NUMERIC = 3
EXIT_RANGE = 4

_NUMERIC_ERRORS = (NonConvergenceError, ContourError, EvalDomainError, GammaPoleError,
                   PoleMergeError, QuadratureError, FloatingPointError, OverflowError)


class UsageError(Exception):
    pass


class OutputFormat(enum.Enum):
    csv = "csv"
    tsv = "tsv"


@dataclass
class RunConfig:
    tol: float = 1e-10
    threads: int = 1
    format: OutputFormat = OutputFormat.csv
    output: str | None = None

    def __post_init__(self):
        if not 1e-14 <= self.tol <= 1e-2:
            raise UsageError(f"tol must lie in [1e-14, 1e-2], got {self.tol}")
        if self.threads < 1:
            raise UsageError("threads must be >= 1")


_CONFIG_KEYS = {"tol": float, "threads": int, "format": str, "output": str}


def read_config_file(path: str) -> dict:
    """Plain ``key = value`` lines; ``#`` starts a comment."""
    values = {}
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read config file {path}: {exc}") from exc
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise UsageError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        if key not in _CONFIG_KEYS:
            raise UsageError(f"{path}:{lineno}: unknown key {key!r}")
        try:
            values[key] = _CONFIG_KEYS[key](value)
        except ValueError as exc:
            raise UsageError(f"{path}:{lineno}: bad value for {key}: {value!r}") from exc
    return values


def build_config(args: argparse.Namespace) -> RunConfig:
    values = {"threads": default_threads()}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key in _CONFIG_KEYS:
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    fmt = values.get("format", "csv")
    try:
        values["format"] = OutputFormat(fmt)
    except ValueError as exc:
        raise UsageError(f"format must be csv or tsv, got {fmt!r}") from exc
    return RunConfig(**values)


# ---------------------------------------------------------------------------
# output


def fmt_num(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _cell(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, (int, float, np.integer, np.floating)):
        return fmt_num(v)
    if isinstance(v, enum.Enum):
        return str(v.value)
    if v is None:
        return ""
    return str(v)


class Table:
    def __init__(self, cfg: RunConfig, header: Sequence[str]):
        self.cfg = cfg
        self.buf = io.StringIO()
        delim = "," if cfg.format is OutputFormat.csv else "\t"
        self.writer = csv.writer(self.buf, delimiter=delim, lineterminator="\n")
        self.writer.writerow(header)

    def row(self, values: Iterable) -> None:
        self.writer.writerow([_cell(v) for v in values])

    def emit(self) -> None:
        text = self.buf.getvalue()
        if self.cfg.output and self.cfg.output != "-":
            Path(self.cfg.output).write_text(text)
        else:
            sys.stdout.write(text)


def _floats(text: str, name: str) -> list[float]:
    try:
        vals = [float(tok) for tok in text.replace(" ", "").split(",") if tok]
    except ValueError as exc:
        raise UsageError(f"{name}: expected comma-separated numbers, got {text!r}") from exc
    if not vals:
        raise UsageError(f"{name}: empty list")
    return vals


def _ordered_map(fn: Callable, items: Sequence, threads: int) -> list:
    if threads <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


def _err(msg: str) -> None:
    print(f"foxh: {msg}", file=sys.stderr)


# ---------------------------------------------------------------------------
# commands


def cmd_eval_h(args, cfg: RunConfig) -> int:
    try:
        h = parse_hparams(args.params)
    except ValueError as exc:
        _err(f"cannot parse parameters: {exc}")
        return EXIT_USAGE
    zs = _floats(args.z, "--z")
    diags = validate(h)
    if diags:
        for d in diags:
            _err(d)
        return EXIT_NUMERIC
    fn = {"auto": eval_auto, "left": eval_series_left, "right": eval_series_right,
          "contour": eval_contour}[args.method]
    results = _ordered_map(lambda z: fn(h, z, cfg.tol), zs, cfg.threads)
    table = Table(cfg, ["z", "value", "abs_err_est", "method", "terms"])
    for z, res in zip(zs, results):
        table.row([z, res.value, res.abs_err_est, res.method, res.terms_or_nodes])
    table.emit()
    return EXIT_OK


def cmd_ml(args, cfg: RunConfig) -> int:
    xs = _floats(args.x, "--x")
    values = _ordered_map(lambda x: (ml_neg(args.alpha, x), ml_route(args.alpha, x)), xs, cfg.threads)
    table = Table(cfg, ["x", "value", "route"])
    for x, (v, route) in zip(xs, values):
        table.row([x, v, route])
    table.emit()
    return EXIT_OK


def cmd_kernel(args, cfg: RunConfig) -> int:
    if args.table:
        ts = np.geomspace(args.t_min, args.t_max, args.nt) if args.nt > 1 else np.array([args.t_min])
        rs = np.geomspace(args.r_min, args.r_max, args.nr) if args.nr > 1 else np.array([args.r_min])
        pts = [KernelPoint(args.alpha, args.beta, args.dim, float(t), float(r)) for t in ts for r in rs]
        header = ["t", "r", "G", "abs_err_est", "method"]
    else:
        if args.r is None:
            raise UsageError("kernel needs --r (or --table)")
        pts = [KernelPoint(args.alpha, args.beta, args.dim, args.t, r) for r in _floats(args.r, "--r")]
        header = ["r", "G", "abs_err_est", "method", "regime"]
    results = _ordered_map(lambda p: g_eval(p, tol=cfg.tol), pts, cfg.threads)
    table = Table(cfg, header)
    for p, res in zip(pts, results):
        if args.table:
            table.row([p.t, p.r, res.value, res.abs_err_est, res.method])
        else:
            table.row([p.r, res.value, res.abs_err_est, res.method, asymptotic_regime(p).regime])
    table.emit()
    return EXIT_OK


def _apply_op(e: HExpr, op: str) -> HExpr:
    name, _, argtext = op.partition(":")
    vals = [v for v in argtext.split(",") if v] if argtext else []
    nums = []
    for v in vals:
        try:
            nums.append(parse_number(v))
        except ValueError as exc:
            raise UsageError(f"bad number {v!r} in {op!r}") from exc
    table = {
        "reflect": (0, lambda: reflect(e)),
        "cancel-lower": (0, lambda: cancel_first_lower_last_upper(e)),
        "cancel-upper": (0, lambda: cancel_first_upper_last_lower(e)),
        "power-shift": (1, lambda: power_shift(e, *nums)),
        "rescale": (1, lambda: rescale(e, *nums)),
        "derivative": (1, lambda: derivative_lift(e, int(nums[0]))),
        "laplace": (0, lambda: laplace_map(e)),
        "hankel": (3, lambda: hankel_map(e, *nums)),
        "times": (2, lambda: times(e, *nums)),
    }
    if name not in table:
        raise UsageError(f"unknown rewrite {name!r}; choose from {', '.join(table)}")
    arity, fn = table[name]
    if len(nums) != arity:
        raise UsageError(f"{name} takes {arity} argument(s), got {len(nums)}")
    return fn()


def cmd_rewrite(args, cfg: RunConfig) -> int:
    try:
        h = parse_hparams(args.params)
        coeff, power, const, xpow = (parse_number(v) for v in
                                     (args.coeff, args.arg_power, args.const, args.power))
    except ValueError as exc:
        _err(f"cannot parse expression: {exc}")
        return EXIT_USAGE
    e = HExpr(const, xpow, h, coeff, power)
    steps = [e]
    try:
        for op in args.op or []:
            e = _apply_op(e, op)
            steps.append(e)
    except RewriteError as exc:
        _err(f"rewrite failed: {exc}")
        return EXIT_NUMERIC
    for i, s in enumerate(steps):
        label = "input" if i == 0 else args.op[i - 1]
        print(f"{label}: {s}")
    if args.at:
        table = Table(cfg, ["x", "value", "abs_err_est"])
        for x in _floats(args.at, "--at"):
            v, err = evaluate(e, x, cfg.tol)
            table.row([x, v, err])
        table.emit()
    return EXIT_OK


def cmd_classify(args, cfg: RunConfig) -> int:
    print(classify(args.alpha, args.beta, args.dim))
    return EXIT_OK


_REPORT_HEADER = ["alpha", "beta", "d", "verdict", "case", "residue_sign", "residue_has_log",
                  "cm_first_violation_order", "scan_min_value", "scan_min_location", "consistent", "problems"]


def _report_row(a, b, d, rep):
    return [a, b, d, rep.classification.verdict, rep.classification.case_code, rep.residue_sign,
            rep.residue_has_log, rep.cm_first_violation_order, rep.scan_min_value,
            rep.scan_min_location, rep.consistent, "; ".join(rep.problems)]


def cmd_report(args, cfg: RunConfig) -> int:
    rep = full_report(args.alpha, args.beta, args.dim)
    table = Table(cfg, _REPORT_HEADER)
    table.row(_report_row(args.alpha, args.beta, args.dim, rep))
    table.emit()
    if not rep.consistent:
        for p in rep.problems:
            _err(f"INCONSISTENT: {p}")
        return EXIT_VERIFY
    return EXIT_OK


def _read_grid(path: str) -> list[tuple[float, float, int]]:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise UsageError(f"cannot read grid file {path}: {exc}") from exc
    points = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].replace(",", " ").strip()
        if not line:
            continue
        toks = line.split()
        if toks[0].lower() == "alpha":
            continue
        try:
            a, b, d = float(toks[0]), float(toks[1]), int(toks[2])
        except (ValueError, IndexError) as exc:
            raise UsageError(f"{path}:{lineno}: expected 'alpha beta d'") from exc
        points.append((a, b, d))
    if not points:
        raise UsageError(f"{path}: no grid points")
    return points


def cmd_verify_grid(args, cfg: RunConfig) -> int:
    points = _read_grid(args.grid)
    for a, b, d in points:
        classify(a, b, d)  # range errors before any heavy work
    reports = _ordered_map(lambda p: full_report(*p), points, cfg.threads)
    table = Table(cfg, _REPORT_HEADER)
    for (a, b, d), rep in zip(points, reports):
        table.row(_report_row(a, b, d, rep))
    table.emit()
    bad = sum(not r.consistent for r in reports)
    print(f"{len(points) - bad}/{len(points)} grid points consistent", file=sys.stderr)
    return EXIT_OK if bad == 0 else EXIT_VERIFY


def cmd_verify(args, cfg: RunConfig) -> int:
    from .verify import SUITES, run_suite

    if args.suite != "all" and args.suite not in SUITES:
        _err(f"unknown suite {args.suite!r}; choose from all, {', '.join(SUITES)}")
        return EXIT_USAGE
    results = run_suite(args.suite)
    table = Table(cfg, ["suite", "check", "passed", "measured", "threshold", "detail"])
    for res in results:
        print(f"== {res.suite}: {res.n_passed}/{len(res.checks)} passed ({res.seconds:.1f} s)")
        for c in res.checks:
            mark = "PASS" if c.passed else "FAIL"
            print(f"  {mark}  {c.name}  measured={c.measured:.3g} threshold={c.threshold:.3g}  {c.detail}")
            table.row([res.suite, c.name, c.passed, c.measured, c.threshold, c.detail])
    if args.csv:
        Path(args.csv).write_text(table.buf.getvalue())
    ok = all(r.passed for r in results)
    print("ALL PASS" if ok else "FAILURES PRESENT")
    return EXIT_OK if ok else EXIT_VERIFY


# ---------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        _err(message)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol", type=float, help="target tolerance (default 1e-10)")
    common.add_argument("--threads", type=int, help="worker threads (default from FOXH_THREADS, else 1)")
    common.add_argument("--format", choices=["csv", "tsv"], help="table format")
    common.add_argument("--output", "-o", help="write the table to this file")
    common.add_argument("--config", help="key=value file; flags override it")

    parser = _Parser(prog="foxh", description="Fox H-function evaluation and fractional diffusion kernels.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("eval-h", parents=[common], help="evaluate an H-function")
    p.add_argument("params", help="'m n | a:alpha, ... | b:beta, ...'")
    p.add_argument("--z", required=True, help="comma-separated arguments")
    p.add_argument("--method", choices=["auto", "left", "right", "contour"], default="auto")
    p.set_defaults(func=cmd_eval_h)

    p = sub.add_parser("ml", parents=[common], help="Mittag-Leffler E_alpha(-x)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--x", required=True)
    p.set_defaults(func=cmd_ml)

    p = sub.add_parser("kernel", parents=[common], help="fundamental solution G(t, r)")
    p.add_argument("--alpha", type=float, required=True)
    p.add_argument("--beta", type=float, required=True)
    p.add_argument("--dim", type=int, required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--r", help="comma-separated radii")
    p.add_argument("--table", action="store_true", help="emit a (t, r) grid instead")
    p.add_argument("--t-min", type=float, default=0.1)
    p.add_argument("--t-max", type=float, default=10.0)
    p.add_argument("--nt", type=int, default=5)
    p.add_argument("--r-min", type=float, default=0.01)
    p.add_argument("--r-max", type=float, default=100.0)
    p.add_argument("--nr", type=int, default=41)
    p.set_defaults(func=cmd_kernel)

    p = sub.add_parser("rewrite", parents=[common], help="apply rewrite rules to const*x^power*H(coeff*x^arg_power)")
    p.add_argument("params")
    p.add_argument("--const", default="1")
    p.add_argument("--power", default="0")
    p.add_argument("--coeff", default="1")
    p.add_argument("--arg-power", default="1")
    p.add_argument("--op", action="append",
                   help="rule[:args], repeatable: reflect, cancel-lower, cancel-upper, power-shift:s, "
                        "rescale:k, derivative:k, laplace, hankel:omega,eta,tau, times:c,w")
    p.add_argument("--at", help="evaluate the final expression at these x")
    p.set_defaults(func=cmd_rewrite)

    for name, func, helptext in (("classify", cmd_classify, "sign verdict"),
                                 ("report", cmd_report, "classification plus numeric checks")):
        p = sub.add_parser(name, parents=[common], help=helptext)
        p.add_argument("alpha", type=float)
        p.add_argument("beta", type=float)
        p.add_argument("dim", type=int)
        p.set_defaults(func=func)

    p = sub.add_parser("verify-grid", parents=[common], help="consistency matrix over a grid file")
    p.add_argument("grid", help="file with 'alpha beta d' per line")
    p.set_defaults(func=cmd_verify_grid)

    p = sub.add_parser("verify", parents=[common], help="run a verification suite")
    p.add_argument("suite", help="closed-forms, cross-method, rewrite, fourier, mass, asymptotics, "
                                 "subordination, positivity-grid or all")
    p.add_argument("--csv", help="also write the machine-readable results here")
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        cfg = build_config(args)
        return args.func(args, cfg)
    except UsageError as exc:
        _err(str(exc))
        return EXIT_USAGE
    except KernelRangeError as exc:
        _err(f"range error: {exc}")
        return EXIT_RANGE
    except _NUMERIC_ERRORS as exc:
        _err(f"numeric failure: {exc}")
        return EXIT_NUMERIC
    except ValueError as exc:
        # MLQuery and similar guards
        _err(f"range error: {exc}")
        return EXIT_RANGE


if __name__ == "__main__":
    sys.exit(main())
