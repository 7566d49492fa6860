"""Command-line entry points.

Subcommands: ``sweep`` (run a spec file), ``predict`` (one theory
prediction), ``gen-data`` (materialize a dataset bundle), ``plot``
(render a sweep CSV as SVG). Exit codes: 0 success, 1 any failed sweep
row, 2 configuration problems.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

import numpy as np

from .data import GmmConfig, generate_dataset, save_dataset
from .errors import ConfigError, MixregError
from .solvers import RegKind
from .svgplot import emit_svg_plot
from .sweep import (
    SweepSpec,
    default_lambda_grid,
    emit_csv,
    read_csv,
    run_sweep,
)
from .theory import lasso_prediction, linf_prediction, ridge_prediction

_SPEC_KEYS = {
    "reg", "d", "n", "k", "r", "c", "sigma", "seed", "trials", "test_size",
    "lambda_min", "lambda_max", "lambda_points", "lambdas", "mc_samples",
    "solver_tol", "solver_max_iter", "nm_max_iter", "workers", "out_csv",
    "out_plot",
}

_INT_KEYS = {"d", "n", "k", "seed", "trials", "test_size", "lambda_points",
             "mc_samples", "solver_max_iter", "nm_max_iter", "workers"}
_FLOAT_KEYS = {"r", "c", "sigma", "lambda_min", "lambda_max", "solver_tol"}


def parse_spec_file(path) -> dict:
    """Plain-text `key = value` lines; '#' starts a comment."""
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read spec file {path}: {exc}") from exc
    values: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"{path}:{lineno}: expected key = value")
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if key not in _SPEC_KEYS:
            raise ConfigError(f"{path}:{lineno}: unknown key '{key}'")
        try:
            if key in _INT_KEYS:
                values[key] = int(val)
            elif key in _FLOAT_KEYS:
                values[key] = float(val)
            elif key == "lambdas":
                values[key] = tuple(float(v) for v in val.split(",") if v)
            else:
                values[key] = val
        except ValueError as exc:
            raise ConfigError(f"{path}:{lineno}: bad value for {key}: "
                              f"{val}") from exc
    return values


def _reg_kind(name: str) -> RegKind:
    try:
        return RegKind(name)
    except ValueError:
        raise ConfigError(f"unknown regularizer '{name}' "
                          f"(expected l2, l1, or linf)") from None


def build_spec(values: dict) -> SweepSpec:
    for key in ("reg", "d", "n", "k"):
        if key not in values:
            raise ConfigError(f"spec is missing required key '{key}'")
    kind = _reg_kind(values["reg"])
    cfg = GmmConfig(d=values["d"], n=values["n"], k=values["k"],
                    r=values.get("r", 0.0), c=values.get("c", 0.0),
                    sigma=values.get("sigma", 1.0),
                    seed=values.get("seed", 0))
    if "lambdas" in values:
        grid = tuple(values["lambdas"])
    elif "lambda_min" in values or "lambda_max" in values:
        lo = values.get("lambda_min", 1.0)
        hi = values.get("lambda_max", 1e5)
        pts = values.get("lambda_points", 40)
        if lo <= 0 or hi <= lo:
            raise ConfigError("need 0 < lambda_min < lambda_max")
        grid = tuple(np.logspace(np.log10(lo), np.log10(hi), pts))
    else:
        grid = default_lambda_grid(kind, values.get("lambda_points", 40))
    kwargs = {}
    for key in ("trials", "test_size", "mc_samples", "solver_tol",
                "solver_max_iter", "nm_max_iter", "workers", "out_csv",
                "out_plot"):
        if key in values:
            kwargs[key] = values[key]
    return SweepSpec(cfg=cfg, reg_kind=kind, lambda_grid=grid, **kwargs)


def _add_cfg_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--d", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--r", type=float, default=0.0)
    p.add_argument("--c", type=float, default=0.0)
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)


def _cfg_from_args(args) -> GmmConfig:
    return GmmConfig(d=args.d, n=args.n, k=args.k, r=args.r, c=args.c,
                     sigma=args.sigma, seed=args.seed)


def cmd_sweep(args) -> int:
    values = parse_spec_file(args.spec_file)
    for key in ("trials", "test_size", "workers", "out_csv", "out_plot"):
        flag = getattr(args, key, None)
        if flag is not None:
            values[key] = flag
    spec = build_spec(values)
    rows = run_sweep(spec)
    out_csv = spec.out_csv or "sweep.csv"
    emit_csv(rows, out_csv)
    print(f"wrote {out_csv} ({len(rows)} rows)")
    if spec.out_plot:
        _plot_rows([row.as_record() for row in rows], spec.out_plot,
                   spec.reg_kind)
    failed = [row for row in rows if row.status != "ok"]
    for row in failed:
        print(f"lambda={row.lam:g}: {row.status}", file=sys.stderr)
    return 1 if failed else 0


def _plot_rows(records: list[dict], out_plot: str, kind: RegKind) -> None:
    lams = [rec["lambda"] for rec in records]

    def series(col):
        return [(lam, rec[col]) for lam, rec in zip(lams, records)
                if rec.get(col) is not None]

    err = {"empirical error": series("empirical_error_mean"),
           "predicted error": series("predicted_error")}
    comp = series("compressed_error_mean")
    if comp:
        label = ("sparsified error" if kind == RegKind.L1
                 else "one-bit error")
        err[label] = comp
    emit_svg_plot(err, out_plot, title="classification error vs lambda",
                  y_label="error")
    frac_pred = series("active_fraction_pred")
    frac_meas = series("active_fraction_measured")
    if frac_pred or frac_meas:
        frac = {}
        name = ("nonzero fraction" if kind == RegKind.L1
                else "boundary fraction")
        if frac_pred:
            frac[f"predicted {name}"] = frac_pred
        if frac_meas:
            frac[f"measured {name}"] = frac_meas
        second = Path(out_plot)
        second = second.with_name(second.stem + "_fraction" + second.suffix)
        emit_svg_plot(frac, second, title=f"{name} vs lambda", y_label=name)


def cmd_predict(args) -> int:
    cfg = _cfg_from_args(args)
    kind = _reg_kind(args.reg)
    lam = args.lam
    if lam <= 0:
        raise ConfigError("--lambda must be > 0")
    if kind == RegKind.L2_SQUARED:
        pred = ridge_prediction(cfg, lam, mc_samples=args.mc_samples)
    elif kind == RegKind.L1:
        pred = lasso_prediction(cfg, lam, mc_samples=args.mc_samples)
    else:
        pred = linf_prediction(cfg, lam, mc_samples=args.mc_samples)
    print(f"reg = {kind.value}")
    print(f"lambda = {lam:.10g}")
    print(f"error = {pred.error:.10g}")
    print(f"margin_arg = {pred.margin_arg:.10g}")
    if pred.sparsity_fraction is not None:
        print(f"sparsity_fraction = {pred.sparsity_fraction:.10g}")
    if pred.boundary_fraction is not None:
        print(f"boundary_fraction = {pred.boundary_fraction:.10g}")
        print(f"zeta_per_side = {pred.boundary_fraction / 2:.10g}")
    if pred.saddle is not None:
        for fld in dataclasses.fields(pred.saddle):
            print(f"{fld.name} = {getattr(pred.saddle, fld.name):.10g}")
    return 0


def cmd_gen_data(args) -> int:
    cfg = _cfg_from_args(args)
    dataset = generate_dataset(cfg)
    save_dataset(dataset, args.out)
    print(f"wrote {args.out} (X {dataset.n}x{dataset.d}, k={dataset.k})")
    return 0


def cmd_plot(args) -> int:
    records = read_csv(args.csv)
    if not records:
        raise ConfigError(f"{args.csv} has no data rows")
    cols = (args.series.split(",") if args.series
            else ["empirical_error_mean", "predicted_error",
                  "compressed_error_mean"])
    series = {}
    for col in cols:
        pts = [(rec["lambda"], rec[col]) for rec in records
               if rec.get(col) is not None]
        if pts:
            series[col] = pts
    if not series:
        raise ConfigError(f"none of the columns {cols} have data")
    emit_svg_plot(series, args.out, title=Path(args.csv).stem)
    print(f"wrote {args.out}")
    return 0


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mixreg",
        description="Regularized multiclass linear regression on corrupted "
                    "Gaussian mixtures: sweeps, predictions, compression.")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="run a lambda sweep from a spec file")
    p_sweep.add_argument("spec_file")
    p_sweep.add_argument("--trials", type=int, default=None)
    p_sweep.add_argument("--test-size", dest="test_size", type=int,
                         default=None)
    p_sweep.add_argument("--workers", type=int, default=None)
    p_sweep.add_argument("--out-csv", dest="out_csv", default=None)
    p_sweep.add_argument("--out-plot", dest="out_plot", default=None)
    p_sweep.set_defaults(func=cmd_sweep)

    p_pred = sub.add_parser("predict", help="print one theory prediction")
    p_pred.add_argument("--reg", required=True, choices=["l2", "l1", "linf"])
    p_pred.add_argument("--lambda", dest="lam", type=float, required=True)
    p_pred.add_argument("--mc-samples", dest="mc_samples", type=int,
                        default=200_000)
    _add_cfg_flags(p_pred)
    p_pred.set_defaults(func=cmd_predict)

    p_gen = sub.add_parser("gen-data", help="write a dataset bundle (.npz)")
    _add_cfg_flags(p_gen)
    p_gen.add_argument("--out", required=True)
    p_gen.set_defaults(func=cmd_gen_data)

    p_plot = sub.add_parser("plot", help="render a sweep CSV as SVG")
    p_plot.add_argument("csv")
    p_plot.add_argument("--out", required=True)
    p_plot.add_argument("--series", default=None,
                        help="comma-separated column names")
    p_plot.set_defaults(func=cmd_plot)
    return parser


def main(argv=None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except MixregError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
