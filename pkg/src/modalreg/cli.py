"""Command-line interface: dataset ingestion, subcommand dispatch, and
result serialization.

Exit codes: 0 success, 1 validation error, 2 numerical failure.  Every
result file gets a JSON config echo (``<output>.config.json``) sufficient
to reproduce it, and numeric output is fixed at 17 significant digits.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys

import numpy as np

from . import __version__
from .bandwidth import error_density_derivatives, modal_linear_pilot, \
    optimal_bandwidths, plugin_quantities, select_bandwidths, \
    vc_modal_pilot, vc_optimal_bandwidths, vc_plugin_quantities, \
    vc_select_bandwidths
from .baselines import BaselineMethod, BaselineSpec, cv_bandwidth, \
    local_fit_curve, vc_baseline_fit
from .errors import DimensionError, ModalRegressionError, NonFiniteError, \
    ParseError
from .kernels import KernelSpec
from .modal_lpr import Bandwidths, Dataset, EMConfig, fit_curve
from .study.coverage import ALL_METHODS, METHOD_LLMR, run_coverage_study
from .study.crossval import cv_mspe
from .study.scenarios import example1, homoscedastic_scalar, \
    homoscedastic_vc, vc_model
from .study.theory import mc_theory_check, vc_theory_check
from .varying_coeff import VCDataset, vc_fit_curves

#: validation failures exit 1; every other package error is numerical (2)
_VALIDATION_CODES = {"E_PARSE", "E_DIMENSION", "E_NON_FINITE", "E_METHOD"}


class CLIError(ModalRegressionError):
    code = "E_CONFIG"


class _Parser(argparse.ArgumentParser):
    """argparse with exit code 1 (validation) instead of the default 2."""

    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"E_CONFIG: {message}", file=sys.stderr)
        raise SystemExit(1)


def _fmt(v) -> str:
    return format(float(v), ".17g")


def parse_grid(spec: str) -> np.ndarray:
    """Parse an ``a:b:k`` grid specification into k points on [a, b]."""
    parts = spec.split(":")
    if len(parts) != 3:
        raise CLIError(f"grid spec {spec!r} is not of the form a:b:k")
    try:
        a, b, k = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError as exc:
        raise CLIError(f"grid spec {spec!r}: {exc}") from None
    if k < 1 or not b >= a:
        raise CLIError("grid needs b >= a and k >= 1")
    return np.linspace(a, b, k)


def _read_rows(path: str):
    try:
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            rows = list(reader)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    if len(rows) < 2:
        raise ParseError(f"{path}: need a header row and at least one data row")
    return rows[0], rows[1:]


def _numeric_rows(rows, width: int, path: str) -> np.ndarray:
    out = np.empty((len(rows), width))
    for i, row in enumerate(rows):
        line = i + 2  # header is line 1
        if len(row) != width:
            raise DimensionError(
                f"{path}:{line}: expected {width} columns, got {len(row)}")
        try:
            vals = [float(c) for c in row]
        except ValueError as exc:
            raise ParseError(f"{path}:{line}: {exc}") from None
        if not all(np.isfinite(v) for v in vals):
            raise NonFiniteError(f"{path}:{line}: non-finite value")
        out[i] = vals
    return out


def parse_dataset(path: str, layout: str = "auto"):
    """Read a CSV dataset.  Scalar layout has columns ``x,y``; the
    varying-coefficient layout ``u,x1,...,xp,y`` (the intercept column is
    synthesized, not stored)."""
    header, rows = _read_rows(path)
    header = [h.strip().lower() for h in header]
    if layout == "auto":
        layout = "scalar" if header[:1] == ["x"] else "vc"
    if layout == "scalar":
        if header != ["x", "y"]:
            raise ParseError(f"{path}: expected header 'x,y', got {header}")
        vals = _numeric_rows(rows, 2, path)
        return Dataset(x=vals[:, 0], y=vals[:, 1])
    if header[0] != "u" or header[-1] != "y" or len(header) < 3:
        raise ParseError(
            f"{path}: expected header 'u,x1,...,xp,y', got {header}")
    vals = _numeric_rows(rows, len(header), path)
    n = vals.shape[0]
    X = np.column_stack([np.ones(n), vals[:, 1:-1]])
    return VCDataset(u=vals[:, 0], X=X, y=vals[:, -1])


def _write_csv(path: str, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(c) if isinstance(c, (int, float, np.floating))
                        and not isinstance(c, bool) else str(c) for c in row])


def _write_config_echo(output: str, args: argparse.Namespace):
    cfg = {k: v for k, v in vars(args).items() if k != "func"}
    cfg["version"] = __version__
    with open(output + ".config.json", "w") as fh:
        json.dump(cfg, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _check_method(name: str) -> str:
    m = name.lower()
    if m not in ALL_METHODS:
        raise argparse.ArgumentTypeError(
            f"E_METHOD: unknown method {name!r} (choose from {ALL_METHODS})")
    return m


def _em_config(args) -> EMConfig:
    return EMConfig(kernel=KernelSpec.from_name(args.kernel),
                    seed=args.seed or 0,
                    order=getattr(args, "order", 1))


def _scenario(name: str):
    table = {"example1": example1, "vc1": lambda: vc_model(1),
             "vc2": lambda: vc_model(2)}
    if name not in table:
        raise CLIError(f"unknown scenario {name!r}")
    return table[name]()


def _fit_grid(args, lo: float, hi: float) -> np.ndarray:
    if args.grid is None:
        return np.linspace(lo, hi, 100)
    grid = parse_grid(args.grid)
    if grid[0] < lo or grid[-1] > hi:
        raise CLIError("grid bounds fall outside the data range")
    return grid


def _scalar_bandwidth(args, data: Dataset, cfg: EMConfig):
    if args.bandwidth == "manual":
        if args.h1 is None or (args.method == METHOD_LLMR and args.h2 is None):
            raise CLIError("manual bandwidth mode requires --h1 (and --h2)")
        return Bandwidths(args.h1, args.h2) if args.method == METHOD_LLMR \
            else args.h1
    if args.method == METHOD_LLMR:
        if args.bandwidth == "cv":
            raise CLIError("cv bandwidths are only defined for the baselines")
        return select_bandwidths(data, cfg)
    if args.bandwidth == "plugin":
        raise CLIError("plug-in bandwidths are only defined for llmr")
    return cv_bandwidth(data, BaselineMethod(args.method))


def cmd_fit(args) -> int:
    data = parse_dataset(args.input, "scalar")
    cfg = _em_config(args)
    grid = _fit_grid(args, float(data.x.min()), float(data.x.max()))
    bw = _scalar_bandwidth(args, data, cfg)
    if args.method == METHOD_LLMR:
        est = fit_curve(data, grid, bw, cfg)
        vals = est.values()
        rows = [(x, v, f.converged if f.ok else False,
                 f.iterations, f.objective)
                for x, v, f in zip(grid, vals, est.fits)]
    else:
        vals = local_fit_curve(data, grid, bw, BaselineMethod(args.method))
        rows = [(x, v, bool(np.isfinite(v)), 0, float("nan"))
                for x, v in zip(grid, vals)]
    _write_csv(args.output, ["x", "m_hat", "converged", "iterations",
                             "objective"], rows)
    _write_config_echo(args.output, args)
    bad = grid[~np.isfinite(vals)]
    if bad.size:
        print("E_DEGENERATE_WINDOW: no fit at grid points "
              + ", ".join(_fmt(b) for b in bad), file=sys.stderr)
        return 2
    return 0


def cmd_vc_fit(args) -> int:
    data = parse_dataset(args.input, "vc")
    cfg = _em_config(args)
    grid = _fit_grid(args, float(data.u.min()), float(data.u.max()))
    header = ["u"] + [f"g{j}" for j in range(data.p)]
    if args.method == METHOD_LLMR:
        if args.bandwidth == "manual":
            if args.h1 is None or args.h2 is None:
                raise CLIError("manual bandwidth mode requires --h1 and --h2")
            bw = Bandwidths(args.h1, args.h2)
        else:
            bw = vc_select_bandwidths(data, cfg)
        B = vc_fit_curves(data, grid, bw, cfg).coefficient_matrix()
    else:
        h = args.h1 if args.bandwidth == "manual" else \
            cv_bandwidth(data, BaselineMethod(args.method))
        if h is None:
            raise CLIError("manual bandwidth mode requires --h1")
        spec = BaselineSpec(BaselineMethod(args.method), h)
        B = np.full((grid.size, data.p), np.nan)
        for i, u0 in enumerate(grid):
            try:
                B[i] = vc_baseline_fit(data, float(u0), spec)
            except ModalRegressionError:
                pass
    _write_csv(args.output, header,
               [(u, *B[i]) for i, u in enumerate(grid)])
    _write_config_echo(args.output, args)
    return 0


def cmd_bandwidth(args) -> int:
    data = parse_dataset(args.input, args.layout)
    cfg = _em_config(args)
    if isinstance(data, VCDataset):
        pilot = vc_modal_pilot(data, cfg)
        dens = error_density_derivatives(pilot)
        q = vc_plugin_quantities(data, pilot, dens, kernel=cfg.kernel)
        bw = vc_optimal_bandwidths(q, data.n)
    else:
        pilot = modal_linear_pilot(data, cfg)
        dens = error_density_derivatives(pilot)
        q = plugin_quantities(data, pilot, dens, kernel=cfg.kernel)
        bw = optimal_bandwidths(q, data.n)
    payload = {"K": q.K, "M": q.M, "N": q.N, "L": q.L, "delta": q.delta,
               "h1": bw.h1, "h2": bw.h2}
    text = json.dumps({k: float(_fmt(v)) for k, v in payload.items()},
                      indent=2) + "\n"
    sys.stdout.write(text)
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
        _write_config_echo(args.output, args)
    return 0


def cmd_simulate(args) -> int:
    sc = _scenario(args.scenario)
    data = sc.sample(args.n, args.seed, args.rep)
    if isinstance(data, VCDataset):
        header = ["u"] + [f"x{j}" for j in range(1, data.p)] + ["y"]
        rows = [(data.u[i], *data.X[i, 1:], data.y[i]) for i in range(data.n)]
    else:
        header = ["x", "y"]
        rows = list(zip(data.x, data.y))
    _write_csv(args.output, header, rows)
    _write_config_echo(args.output, args)
    return 0


def cmd_coverage(args) -> int:
    sc = _scenario(args.scenario)
    methods = [_check_method(m) for m in args.method.split(",")]
    widths = [float(w) for w in args.widths.split(",")]
    reports = run_coverage_study(sc, methods, args.n, args.reps, widths,
                                 seed=args.seed, grid_size=args.grid_size,
                                 cfg=_em_config(args), threads=args.threads)
    _write_csv(args.output,
               ["method", "n", "width", "mean_coverage", "sd_coverage",
                "replications", "failures"],
               [(r.method, r.n, r.width, r.mean_coverage, r.sd_coverage,
                 r.replications, r.failures) for r in reports])
    _write_config_echo(args.output, args)
    return 0


def cmd_theory_check(args) -> int:
    bw = Bandwidths(args.h1, args.h2)
    cfg = _em_config(args)
    if args.scenario == "scalar":
        rep = mc_theory_check(homoscedastic_scalar(args.sigma0), args.x0, bw,
                              args.n, args.reps, args.seed, cfg)
        header = ["n", "replications", "empirical_variance",
                  "theoretical_variance", "variance_ratio", "empirical_bias",
                  "theoretical_bias", "ks_distance"]
        rows = [(rep.n, rep.replications, rep.empirical_variance,
                 rep.theoretical_variance, rep.variance_ratio,
                 rep.empirical_bias, rep.theoretical_bias, rep.ks_distance)]
    elif args.scenario in ("vc1", "vc2"):
        model = int(args.scenario[-1])
        rep = vc_theory_check(homoscedastic_vc(model, args.sigma0), args.x0,
                              bw, args.n, args.reps, args.seed, cfg)
        header = ["coefficient", "n", "replications", "empirical_cov",
                  "theoretical_cov", "diag_ratio", "empirical_bias",
                  "theoretical_bias"]
        rows = [(j, rep.n, rep.replications, rep.empirical_cov_diag[j],
                 rep.theoretical_cov_diag[j], rep.diag_ratios[j],
                 rep.empirical_bias[j], rep.theoretical_bias[j])
                for j in range(rep.empirical_cov_diag.size)]
    else:
        raise CLIError(f"unknown theory scenario {args.scenario!r}")
    _write_csv(args.output, header, rows)
    _write_config_echo(args.output, args)
    return 0


def cmd_cv(args) -> int:
    data = parse_dataset(args.input, args.layout)
    method = _check_method(args.method)
    mode = ("kfold", args.folds) if args.cv_mode == "kfold" \
        else ("mccv", args.test_size, args.reps)
    rep = cv_mspe(data, method, mode, args.seed, _em_config(args))
    _write_csv(args.output,
               ["method", "mode", "median_mspe", "sd_mspe", "folds_used",
                "folds_failed"],
               [(rep.method, rep.mode, rep.median_mspe, rep.sd_mspe,
                 rep.folds_used, rep.folds_failed)])
    _write_config_echo(args.output, args)
    return 0


def _add_common(p, need_input=True, need_seed=False):
    if need_input:
        p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--kernel", default="epanechnikov")
    p.add_argument("--seed", type=int, required=need_seed)


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="modalreg", description=__doc__)
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p = sub.add_parser("fit", help="fit a scalar regression curve")
    _add_common(p)
    p.add_argument("--method", type=_check_method, default=METHOD_LLMR)
    p.add_argument("--bandwidth", choices=("plugin", "manual", "cv"),
                   default="plugin")
    p.add_argument("--h1", type=float)
    p.add_argument("--h2", type=float)
    p.add_argument("--grid", help="evaluation grid a:b:k")
    p.add_argument("--order", type=int, default=1)
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("vc-fit", help="fit varying-coefficient curves")
    _add_common(p)
    p.add_argument("--method", type=_check_method, default=METHOD_LLMR)
    p.add_argument("--bandwidth", choices=("plugin", "manual", "cv"),
                   default="plugin")
    p.add_argument("--h1", type=float)
    p.add_argument("--h2", type=float)
    p.add_argument("--grid", help="evaluation grid a:b:k")
    p.set_defaults(func=cmd_vc_fit, order=1)

    p = sub.add_parser("bandwidth", help="plug-in bandwidth quantities")
    p.add_argument("--input", required=True)
    p.add_argument("--output")
    p.add_argument("--layout", choices=("auto", "scalar", "vc"),
                   default="auto")
    p.add_argument("--kernel", default="epanechnikov")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_bandwidth)

    p = sub.add_parser("simulate", help="generate a synthetic dataset")
    _add_common(p, need_input=False, need_seed=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--rep", type=int, default=0)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("coverage", help="coverage-probability study")
    _add_common(p, need_input=False, need_seed=True)
    p.add_argument("--scenario", required=True)
    p.add_argument("--method", default=",".join(ALL_METHODS),
                   help="comma-separated methods")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--widths", default="0.1,0.2,0.5",
                   help="comma-separated interval widths in sigma units")
    p.add_argument("--grid-size", type=int)
    p.add_argument("--threads", type=int, default=1)
    p.set_defaults(func=cmd_coverage)

    p = sub.add_parser("theory-check",
                       help="Monte-Carlo asymptotic theory check")
    _add_common(p, need_input=False, need_seed=True)
    p.add_argument("--scenario", choices=("scalar", "vc1", "vc2"),
                   required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--reps", type=int, required=True)
    p.add_argument("--h1", type=float, required=True)
    p.add_argument("--h2", type=float, required=True)
    p.add_argument("--x0", type=float, default=0.5)
    p.add_argument("--sigma0", type=float, default=1.0)
    p.set_defaults(func=cmd_theory_check)

    p = sub.add_parser("cv", help="cross-validated prediction error")
    _add_common(p, need_seed=True)
    p.add_argument("--method", required=True)
    p.add_argument("--layout", choices=("auto", "scalar", "vc"),
                   default="auto")
    p.add_argument("--cv-mode", choices=("kfold", "mccv"), default="kfold")
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--test-size", type=int, default=50)
    p.add_argument("--reps", type=int, default=20)
    p.set_defaults(func=cmd_cv)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ModalRegressionError as exc:
        print(f"{exc.code}: {exc}", file=sys.stderr)
        return 1 if exc.code in _VALIDATION_CODES or \
            isinstance(exc, CLIError) else 2
    except ValueError as exc:
        print(f"E_CONFIG: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
