"""Command-line front end: ``gmol fit | regress | simulate | curve``.

Exit codes: 0 success, 1 bad input or usage, 2 numerical non-convergence.
Machine-readable CSV output uses 12 significant digits; tables printed
for people use 4 decimals.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import warnings
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import core, props
from .core import GmolParams, SubModel
from .errors import GmolError, OptimizerError
from .fit import IidSample, fit_mle, gof_stats
from .optimize import OptimizerConfig
from .regression import CensoredDesign, RegParams, fit_regression, lr_test, quantile_residuals
from .simulate import StudyConfig, StudyWarning, run_iid_study, run_regression_study

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_NONCONVERGENCE = 2


class InputError(Exception):
    """Bad file content, bad flag values or an unknown name; maps to exit 1."""


class NonConvergence(Exception):
    """The optimizer did not converge; maps to exit 2."""


# -- CSV I/O -----------------------------------------------------------------------


def fmt(v: float) -> str:
    return format(float(v), ".12g")


@dataclass
class Table:
    """Header plus numeric columns read from a CSV file."""

    path: Path
    columns: dict[str, np.ndarray]

    @property
    def names(self) -> list[str]:
        return list(self.columns)

    def require(self, name: str) -> np.ndarray:
        if name not in self.columns:
            raise InputError(f"{self.path}: missing column {name!r}; available: {', '.join(self.names)}")
        return self.columns[name]


def read_csv(path) -> Table:
    """Read a header + numeric-rows CSV, reporting the line of any bad row."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        raise InputError(f"{path}: no such file") from None
    except OSError as exc:
        raise InputError(f"{path}: {exc.strerror or exc}") from None
    reader = csv.reader(io.StringIO(text))
    try:
        header = [h.strip() for h in next(reader)]
    except StopIteration:
        raise InputError(f"{path}: empty file, a header row is required") from None
    if not header or any(not h for h in header):
        raise InputError(f"{path}:1: header has empty column names")
    if len(set(header)) != len(header):
        raise InputError(f"{path}:1: duplicate column names")
    rows = []
    for fields in reader:
        line = reader.line_num
        if not fields or all(not f.strip() for f in fields):
            continue
        if len(fields) != len(header):
            raise InputError(f"{path}:{line}: expected {len(header)} fields, found {len(fields)}")
        try:
            rows.append([float(f) for f in fields])
        except ValueError:
            raise InputError(f"{path}:{line}: non-numeric value in {fields!r}") from None
        if not all(math.isfinite(v) for v in rows[-1]):
            raise InputError(f"{path}:{line}: non-finite value")
    if not rows:
        raise InputError(f"{path}: no data rows")
    data = np.array(rows, dtype=float)
    return Table(path, {h: data[:, j] for j, h in enumerate(header)})


def write_csv(path, header, rows) -> None:
    """Write rows with UTF-8, LF line endings and 12 significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, (float, np.floating)) else v for v in row])
    Path(path).write_text(buf.getvalue(), encoding="utf-8", newline="")


def _check_times(table: Table) -> np.ndarray:
    t = table.require("time")
    bad = np.flatnonzero(t <= 0)
    if bad.size:
        raise InputError(f"{table.path}:{bad[0] + 2}: times must be > 0")
    return t


def read_iid(path) -> IidSample:
    table = read_csv(path)
    return IidSample(_check_times(table))


def read_censored(path, covariates: list[str]) -> tuple[CensoredDesign, Table]:
    table = read_csv(path)
    t = _check_times(table)
    status = table.require("status")
    bad = np.flatnonzero(~np.isin(status, (0.0, 1.0)))
    if bad.size:
        raise InputError(f"{table.path}:{bad[0] + 2}: status must be 0 or 1")
    for name in covariates:
        if name not in table.columns:
            raise InputError(f"unknown covariate {name!r}; available: {', '.join(table.names)}")
    V = np.column_stack([np.ones(t.size)] + [table.columns[c] for c in covariates])
    return CensoredDesign(t, status.astype(int), V), table


# -- argument helpers ---------------------------------------------------------------


def _floats(text: str, what: str) -> list[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"{what}: expected comma-separated numbers, got {text!r}") from None


def _ints(text: str, what: str) -> list[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise InputError(f"{what}: expected comma-separated integers, got {text!r}") from None


def _params(text: str, what: str) -> GmolParams:
    vals = _floats(text, what)
    if len(vals) != 4:
        raise InputError(f"{what}: expected 4 values alpha,lam,tau,beta, got {len(vals)}")
    return GmolParams(*vals)


def _grid(text: str, open_unit: bool) -> np.ndarray:
    parts = text.split(":")
    if len(parts) != 3:
        raise InputError(f"--grid must be min:max:points, got {text!r}")
    try:
        lo, hi, pts = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise InputError(f"--grid must be min:max:points, got {text!r}") from None
    if pts < 2 or not lo < hi:
        raise InputError("--grid needs min < max and at least 2 points")
    if open_unit and not (0.0 < lo and hi < 1.0):
        raise InputError("this curve needs a grid strictly inside (0, 1)")
    if not open_unit and lo < 0.0:
        raise InputError("x grid must start at 0 or above")
    return np.linspace(lo, hi, pts)


def _print_table(header: list[str], rows: list[list], out) -> None:
    cells = [[str(c) if isinstance(c, str) else f"{c:.4f}" for c in row] for row in rows]
    widths = [max(len(h), *(len(r[j]) for r in cells)) for j, h in enumerate(header)]
    print("  ".join(h.rjust(w) for h, w in zip(header, widths)), file=out)
    for r in cells:
        print("  ".join(c.rjust(w) for c, w in zip(r, widths)), file=out)


# -- commands -----------------------------------------------------------------------


def cmd_fit(args, out=None) -> int:
    out = out or sys.stdout
    sample = read_iid(args.file)
    init = _params(args.init, "--init") if args.init else None
    cfg = OptimizerConfig(seed=args.seed)
    fit = fit_mle(sample, args.model, init=init, cfg=cfg)
    gof = gof_stats(fit, sample)

    print(f"model {fit.model.value}, n = {fit.n}", file=out)
    rows = [[name, est, se] for name, est, se in zip(fit.param_names, fit.estimates, fit.se)]
    _print_table(["param", "estimate", "se"], rows, out)
    print(f"loglik {fit.loglik:.4f}", file=out)
    _print_table(list(gof.as_dict()), [list(gof.as_dict().values())], out)

    dest = Path(args.out) if args.out else Path(args.file).with_suffix(".fit.csv")
    machine = [[f"{n}", est] for n, est in zip(fit.param_names, fit.estimates)]
    machine += [[f"se_{n}", se] for n, se in zip(fit.param_names, fit.se)]
    machine += [["loglik", fit.loglik]] + [[k, v] for k, v in gof.as_dict().items()]
    write_csv(dest, ["quantity", "value"], machine)
    print(f"wrote {dest}", file=out)
    if not fit.converged:
        raise NonConvergence(f"{fit.model.value} fit did not converge")
    return EXIT_OK


def cmd_regress(args, out=None) -> int:
    out = out or sys.stdout
    covs = [c.strip() for c in args.covariates.split(",") if c.strip()] if args.covariates else []
    design, _ = read_censored(args.file, covs)
    cfg = OptimizerConfig(seed=args.seed)
    fits = {m: fit_regression(design, m, cfg=cfg) for m in (SubModel.GMOL, SubModel.MOL, SubModel.LOMAX)}
    fit = fits[SubModel.parse(args.model)]

    labels = {"eta1": "beta", "eta2": "tau"}
    terms = ["(Intercept)"] + covs
    print(f"model {fit.model.value}, n = {design.n}, failures = {design.failures}", file=out)
    rows = []
    m = fit.model.n_shape
    for j, name in enumerate(fit.param_names):
        if j < m:
            rows.append([name, fit.estimates[j], fit.se[j], "-"])
        else:
            link, idx = name[:4], int(name[4:].lstrip("_"))
            label = f"{labels[link]}:{terms[idx]}"
            rows.append([label, fit.estimates[j], fit.se[j], fit.wald_p[j - m]])
    _print_table(["term", "estimate", "se", "p"], rows, out)
    print(f"loglik {fit.loglik:.4f}", file=out)

    gm = fits[SubModel.GMOL]
    lr_rows = []
    for nested, df in ((SubModel.MOL, 1), (SubModel.LOMAX, 2)):
        stat, p = lr_test(gm, fits[nested], df)
        lr_rows.append([f"GMOL vs {nested.name}", f"{df}", stat, p])
    _print_table(["test", "df", "statistic", "p"], lr_rows, out)

    qr, delta = quantile_residuals(fit, design)
    dest = Path(args.residuals) if args.residuals else Path(args.file).with_suffix(".residuals.csv")
    write_csv(dest, ["index", "qr", "status"], [[i + 1, float(q), int(d)] for i, (q, d) in enumerate(zip(qr, delta))])
    print(f"wrote {dest}", file=out)
    if not all(f.converged for f in fits.values()):
        raise NonConvergence("a regression fit did not converge")
    return EXIT_OK


def cmd_simulate(args, out=None) -> int:
    out = out or sys.stdout
    if args.reps < 1:
        raise InputError("--reps must be >= 1")
    truth_vals = _floats(args.truth, "--truth")
    n_list = _ints(args.n_list, "--n-list")
    if not n_list:
        raise InputError("--n-list must not be empty")
    targets = _floats(args.censoring, "--censoring")
    if args.design == "iid":
        if len(truth_vals) != 4:
            raise InputError(f"--truth for the iid design needs 4 values, got {len(truth_vals)}")
        if any(t != 0.0 for t in targets):
            raise InputError("the iid design has no censoring")
        cfg = StudyConfig(GmolParams(*truth_vals), tuple(n_list), args.reps, seed=args.seed)
        runner = run_iid_study
    else:
        if len(truth_vals) != 6:
            raise InputError(f"--truth for the regression design needs 6 values, got {len(truth_vals)}")
        a, lam, e10, e11, e20, e21 = truth_vals
        truth = RegParams(a, lam, (e10, e11), (e20, e21))
        cfg = StudyConfig(truth, tuple(n_list), args.reps, seed=args.seed, censor_targets=tuple(targets))
        runner = run_regression_study
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", StudyWarning)
        table = runner(cfg)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    text = table.to_csv(args.out) if args.out else table.to_csv()
    if args.out:
        print(f"wrote {args.out}", file=out)
    else:
        out.write(text)
    return EXIT_OK


CURVES = {
    "pdf": ("x", False),
    "cdf": ("x", False),
    "hrf": ("x", False),
    "quantile": ("u", True),
    "lorenz": ("nu", True),
    "bonferroni": ("nu", True),
}


def curve_values(what: str, grid: np.ndarray, theta: GmolParams) -> np.ndarray:
    fns = {
        "pdf": core.pdf,
        "cdf": core.cdf,
        "hrf": core.hrf,
        "quantile": core.quantile,
        "lorenz": props.lorenz,
        "bonferroni": props.bonferroni,
    }
    return np.asarray(fns[what](grid, theta), dtype=float)


def cmd_curve(args, out=None) -> int:
    out = out or sys.stdout
    theta = _params(args.params, "--params")
    abscissa, open_unit = CURVES[args.what]
    grid = _grid(args.grid, open_unit)
    values = curve_values(args.what, grid, theta)
    rows = [[float(g), float(v)] for g, v in zip(grid, values)]
    if args.out:
        write_csv(args.out, [abscissa, args.what], rows)
        print(f"wrote {args.out}", file=out)
    else:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow([abscissa, args.what])
        w.writerows([[fmt(a), fmt(b)] for a, b in rows])
        out.write(buf.getvalue())
    return EXIT_OK


# -- parser -------------------------------------------------------------------------


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(f"{self.prog}: {message}")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="gmol", description="GMOL distribution fitting, regression and simulation.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    models = [m.value for m in SubModel]

    f = sub.add_parser("fit", help="fit an iid sample (CSV column 'time')")
    f.add_argument("file")
    f.add_argument("--model", choices=models, default="gmol")
    f.add_argument("--init", help="starting values alpha,lam,tau,beta")
    f.add_argument("--seed", type=int, default=0)
    f.add_argument("--out", help="machine-readable results CSV (default: <file>.fit.csv)")
    f.set_defaults(func=cmd_fit)

    r = sub.add_parser("regress", help="censored regression (columns 'time', 'status', covariates)")
    r.add_argument("file")
    r.add_argument("--model", choices=models, default="gmol")
    r.add_argument("--covariates", default="", help="comma-separated covariate columns")
    r.add_argument("--seed", type=int, default=0)
    r.add_argument("--residuals", help="quantile residuals CSV (default: <file>.residuals.csv)")
    r.set_defaults(func=cmd_regress)

    s = sub.add_parser("simulate", help="Monte Carlo recovery study")
    s.add_argument("--design", choices=["iid", "regression"], required=True)
    s.add_argument("--truth", required=True, help="alpha,lam,tau,beta or alpha,lam,eta10,eta11,eta20,eta21")
    s.add_argument("--n-list", required=True, help="comma-separated sample sizes")
    s.add_argument("--reps", type=int, required=True)
    s.add_argument("--censoring", default="0", help="comma-separated censoring targets in [0, 1)")
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--out", help="output CSV (default: stdout)")
    s.set_defaults(func=cmd_simulate)

    c = sub.add_parser("curve", help="tabulate a distribution curve")
    c.add_argument("--what", choices=list(CURVES), required=True)
    c.add_argument("--params", required=True, help="alpha,lam,tau,beta")
    c.add_argument("--grid", required=True, help="min:max:points")
    c.add_argument("--out", help="output CSV (default: stdout)")
    c.set_defaults(func=cmd_curve)
    return p


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except OptimizerError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE
    except (InputError, GmolError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT


if __name__ == "__main__":
    sys.exit(main())
