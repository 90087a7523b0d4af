"""Command-line front end.

Subcommands: generate, fit, predict, cv, scan, noise, scaling, plot.
Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace

import numpy as np

from . import baselines, fwf_core, harness, modelio, preimage, svg
from .correntropy import KernelConfig
from .errors import DataError, NumericalError
from .harness import ExperimentConfig, FilterSpec
from .signal import embed, series_from_csv, series_to_csv


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _build_parser() -> _Parser:
    p = _Parser(prog="fwf", description=__doc__)
    p.add_argument("--seed", type=int, default=None,
                   help="override the config seed")
    p.add_argument("--config", default=None,
                   help="experiment config file (key=value lines)")
    p.add_argument("--out", default=".", help="output directory")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a generated series to CSV")
    g.add_argument("--generator", choices=("mg", "lorenz"), default=None)
    g.add_argument("--n", type=int, default=None)
    g.add_argument("--param", action="append", default=[], metavar="k=v",
                   help="generator parameter override (repeatable)")
    g.add_argument("--transform", choices=("none", "standardize", "rescale"),
                   default=None)
    g.add_argument("--noise-std", type=float, default=None)

    f = sub.add_parser("fit", help="train one filter and save its model file")
    f.add_argument("--series", required=True, help="training series CSV")
    f.add_argument("--filter", required=True, help='e.g. "fwf_lm L=7 sigma=1.5 K=1"')
    f.add_argument("--horizon", type=int, default=1)
    f.add_argument("--model-out", default=None, help="model file path")

    pr = sub.add_parser("predict", help="predict a series with a saved model")
    pr.add_argument("--model", required=True)
    pr.add_argument("--series", required=True)
    pr.add_argument("--horizon", type=int, default=None,
                    help="defaults to the model's horizon (FWF) or 1")
    pr.add_argument("--strategy", choices=("fp", "lm"), default=None,
                    help="FWF pre-imaging (default: lm when an index is stored)")

    cv = sub.add_parser("cv", help="k-fold cross-validation")
    _add_filter_args(cv)

    sc = sub.add_parser("scan", help="hyperparameter surface (training MSE)")
    _add_filter_args(sc)
    sc.add_argument("--sigmas", required=True, help="comma list, e.g. 0.5,1,1.5")
    sc.add_argument("--lags", required=True, help="comma list, e.g. 3,5,7")

    no = sub.add_parser("noise", help="noise-robustness study")
    _add_filter_args(no)
    no.add_argument("--levels", default="0.01,0.04,0.1,0.2")

    sl = sub.add_parser("scaling", help="cost-versus-training-size study")
    _add_filter_args(sl)
    sl.add_argument("--sizes", default="500,1000,2000,4000")
    sl.add_argument("--test-count", type=int, default=500)

    pl = sub.add_parser("plot", help="render a result CSV as SVG")
    pl.add_argument("--input", required=True, help="surface/noise/scaling CSV")
    return p


def _add_filter_args(sp):
    sp.add_argument("--filter", action="append", default=[],
                    metavar="SPEC", help="filter spec (repeatable); overrides config filters")
    sp.add_argument("--n", type=int, default=None)
    sp.add_argument("--generator", choices=("mg", "lorenz", "file"), default=None)
    sp.add_argument("--source", default=None, help="series CSV for generator=file")
    sp.add_argument("--horizon", type=int, default=None)
    sp.add_argument("--folds", type=int, default=None)
    sp.add_argument("--noise-std", type=float, default=None)
    sp.add_argument("--transform", choices=("none", "standardize", "rescale"),
                    default=None)
    sp.add_argument("--param", action="append", default=[], metavar="k=v")


def _load_config(args) -> ExperimentConfig:
    if args.config:
        with open(args.config) as fh:
            config = ExperimentConfig.from_text(fh.read())
    else:
        config = ExperimentConfig()
    updates = {}
    for name in ("generator", "n", "horizon", "folds", "transform", "source"):
        val = getattr(args, name, None)
        if val is not None:
            updates[name] = val
    if getattr(args, "noise_std", None) is not None:
        updates["noise_std"] = args.noise_std
    if args.seed is not None:
        updates["seed"] = args.seed
    if getattr(args, "filter", None):
        updates["filters"] = tuple(FilterSpec.parse(s) for s in args.filter)
    params = dict(config.gen_params)
    for tok in getattr(args, "param", []):
        if "=" not in tok:
            raise UsageError(f"bad --param {tok!r} (expected k=v)")
        k, v = tok.split("=", 1)
        params[k] = float(v)
    if params != config.gen_params:
        updates["gen_params"] = params
    return replace(config, **updates) if updates else config


def _floats(text):
    return [float(t) for t in text.split(",") if t.strip()]


def _out_path(args, name):
    os.makedirs(args.out, exist_ok=True)
    return os.path.join(args.out, name)


def _cmd_generate(args):
    config = _load_config(args)
    noisy, _ = harness.build_series(config)
    path = _out_path(args, "series.csv")
    series_to_csv(noisy, path)
    print(f"wrote {path} ({len(noisy)} samples, dt={noisy.dt:g})")
    return 0


def _cmd_fit(args):
    spec = FilterSpec.parse(args.filter)
    series = series_from_csv(args.series)
    ds = embed(series, spec.lags, args.horizon)
    index = None
    if spec.kind in ("fwf_lm", "fwf_fp"):
        model = fwf_core.fit_series(series, spec.lags, KernelConfig(spec.sigma),
                                    horizon=args.horizon,
                                    target_condition=spec.target_condition,
                                    centered=spec.centered)
        if spec.kind == "fwf_lm":
            index = preimage.build_local_index(model)
    elif spec.kind == "wiener":
        model = baselines.wiener_fit(ds, ridge=spec.ridge)
    elif spec.kind == "klms":
        model = baselines.klms_train(ds, eta=spec.eta, sigma=spec.sigma)
    else:
        model = baselines.krls_train(ds, ridge=spec.ridge, sigma=spec.sigma,
                                     budget=spec.budget)
    path = args.model_out or _out_path(args, f"model_{spec.kind}.txt")
    modelio.save_model(model, path, index=index)
    print(f"wrote {path}")
    return 0


def _cmd_predict(args):
    model, index = modelio.load_model(args.model)
    series = series_from_csv(args.series)
    if isinstance(model, fwf_core.FwfModel):
        horizon = args.horizon if args.horizon is not None else model.horizon
        lags = model.lags
        strategy_name = args.strategy or ("lm" if index is not None else "fp")
        if strategy_name == "lm":
            if index is None:
                raise DataError("model file has no local-model index block")
            strat = preimage.LM(index)
        else:
            strat = preimage.FP()
        ds = embed(series, lags, horizon)
        preds = preimage.predict_series(model, strat, ds)
    else:
        horizon = args.horizon if args.horizon is not None else 1
        ds = embed(series, model.lags, horizon)
        if isinstance(model, baselines.WienerModel):
            preds = baselines.wiener_predict_batch(model, ds.inputs)
        elif isinstance(model, baselines.KlmsModel):
            preds = baselines.klms_predict_batch(model, ds.inputs)
        else:
            preds = baselines.krls_predict_batch(model, ds.inputs)
    path = _out_path(args, "predictions.csv")
    lines = ["anchor,prediction,target"]
    for j in range(len(ds)):
        lines.append("%d,%.17g,%.17g" % (ds.anchors[j], preds[j], ds.targets[j]))
    modelio.atomic_write(path, "\n".join(lines) + "\n")
    print(f"wrote {path} (mse {harness.mse(preds, ds.targets):.6g})")
    return 0


def _cmd_cv(args):
    config = _load_config(args)
    report = harness.run_cv(config)
    harness.emit(report, "csv", _out_path(args, "results.csv"))
    modelio.atomic_write(_out_path(args, "timings.csv"), report.timings_csv_text())
    print(report.summary_text())
    print(f"wrote {_out_path(args, 'results.csv')} and timings.csv")
    return 0


def _cmd_scan(args):
    config = _load_config(args)
    surface = harness.scan_hyperparameters(config, _floats(args.sigmas),
                                           [int(v) for v in _floats(args.lags)])
    harness.emit(surface, "csv", _out_path(args, "surface.csv"))
    s, L, K, v = surface.argmin()
    print(f"argmin: sigma={s:g} lags={L} K={K} train_mse={v:.6g}")
    print(f"wrote {_out_path(args, 'surface.csv')}")
    return 0


def _cmd_noise(args):
    config = _load_config(args)
    study = harness.run_noise_study(config, _floats(args.levels))
    harness.emit(study, "csv", _out_path(args, "noise.csv"))
    for level in study.levels:
        rep = study.report(level)
        best = min(rep.labels(), key=rep.mean_mse)
        print(f"noise {level:g}: best {best} mse={rep.mean_mse(best):.6g}")
    print(f"wrote {_out_path(args, 'noise.csv')}")
    return 0


def _cmd_scaling(args):
    config = _load_config(args)
    table = harness.run_scaling_study(config, [int(v) for v in _floats(args.sizes)],
                                      test_count=args.test_count)
    harness.emit(table, "csv", _out_path(args, "scaling.csv"))
    for label in table.labels():
        print(f"{label}: test-time log-log slope {table.slope(label):+.3f}")
    print(f"wrote {_out_path(args, 'scaling.csv')}")
    return 0


def _cmd_plot(args):
    with open(args.input) as fh:
        header = fh.readline().strip()
        rows = [line.strip().split(",") for line in fh if line.strip()]
    base = os.path.splitext(os.path.basename(args.input))[0]
    path = _out_path(args, base + ".svg")
    if header == "sigma,lags,K,train_mse,log10_mse":
        surface = harness.ScanSurface(rows=tuple(
            (float(r[0]), int(r[1]), int(r[2]), float(r[3])) for r in rows))
        text = surface.svg_text()
    elif header == "noise_std,filter,fold,mse":
        by = {}
        for r in rows:
            by.setdefault(r[1], {}).setdefault(float(r[0]), []).append(float(r[3]))
        curves = {lab: sorted((lv, float(np.mean(v))) for lv, v in pts.items())
                  for lab, pts in by.items()}
        text = svg.lines_svg(curves, title="noise robustness",
                             xlabel="input noise std", ylabel="mean test MSE",
                             logx=False, logy=True)
    elif header == "filter,n_train,train_ms,test_ms_per_sample,mse":
        table = harness.ScalingTable(rows=tuple(
            harness.ScalingRow(r[0], int(r[1]), float(r[2]) / 1e3,
                               float(r[3]) / 1e3, float(r[4])) for r in rows),
            test_count=0)
        text = table.svg_text()
    else:
        raise DataError(f"don't know how to plot a CSV with header {header!r}")
    modelio.atomic_write(path, text)
    print(f"wrote {path}")
    return 0


_COMMANDS = {
    "generate": _cmd_generate,
    "fit": _cmd_fit,
    "predict": _cmd_predict,
    "cv": _cmd_cv,
    "scan": _cmd_scan,
    "noise": _cmd_noise,
    "scaling": _cmd_scaling,
    "plot": _cmd_plot,
}


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 3
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
