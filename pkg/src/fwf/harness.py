"""Experiment orchestration and reporting.

Experiments are described by a serializable ExperimentConfig (text
key=value mirror used by the CLI); the same config plus seed always
reproduces the same numbers. The MSE side of every emitted CSV is
byte-deterministic; wall-clock measurements live in separate
timing tables because they cannot be (see decisions notes).
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field, fields, replace

import numpy as np

from . import baselines, fwf_core, preimage, svg
from .correntropy import KernelConfig
from .errors import DataError, DataFormatError, FwfError, InsufficientDataError
from .modelio import atomic_write, fmt
from .signal import (
    SupervisedDataset,
    TimeSeries,
    add_gaussian_noise,
    embed,
    generate_lorenz_x,
    generate_mackey_glass,
    kfold_split,
    rescale,
    series_from_csv,
    standardize,
)

# Experiment-level generator defaults. The MG emission stride differs
# from the signal-module default on purpose: a sampling period of 6
# time units is what reproduces the published linear-Wiener error on
# this benchmark, 0.6 makes one-step prediction trivially easy.
MG_DEFAULTS = dict(a=0.2, b=0.1, tau=30.0, dt=0.1, subsample=60, x0=1.2,
                   discard=1000)
LORENZ_DEFAULTS = dict(sigma=10.0, rho=28.0, beta=8.0 / 3.0, dt=0.01,
                       discard=1000)

_KIND_CHOICES = ("fwf_lm", "fwf_fp", "wiener", "klms", "krls")
_ALIASES = {"L": "lags", "cond": "target_condition", "k": "K"}


@dataclass(frozen=True)
class FilterSpec:
    """One filter plus its hyperparameters, parseable from token strings
    like ``fwf_lm L=7 sigma=1.5 K=1``."""

    kind: str
    lags: int = 7
    sigma: float = 1.0
    target_condition: float = 30.0
    K: int = 1
    scale: str = "mean"
    metric: str = "window"
    fp_tol: float = 1e-6
    fp_iters: int = 50
    fp_init: str = "last-sample"
    eta: float = 0.1
    ridge: float | None = None
    budget: int | None = None
    centered: bool = False

    def __post_init__(self):
        if self.kind not in _KIND_CHOICES:
            raise DataError(f"unknown filter kind {self.kind!r}")
        if self.ridge is None:
            object.__setattr__(self, "ridge",
                               0.0 if self.kind == "wiener" else 1e-3)

    @classmethod
    def parse(cls, text: str) -> "FilterSpec":
        tokens = text.split()
        if not tokens:
            raise DataError("empty filter spec")
        kind = tokens[0]
        names = {f.name for f in fields(cls)}
        kwargs = {}
        for tok in tokens[1:]:
            if "=" not in tok:
                raise DataError(f"bad filter token {tok!r} (expected key=value)")
            key, val = tok.split("=", 1)
            key = _ALIASES.get(key, key)
            if key not in names or key == "kind":
                raise DataError(f"unknown filter parameter {key!r}")
            if key in ("lags", "K", "fp_iters", "budget"):
                kwargs[key] = int(val)
            elif key in ("scale", "metric", "fp_init"):
                kwargs[key] = val
            elif key == "centered":
                kwargs[key] = val.lower() in ("1", "true", "yes")
            else:
                kwargs[key] = float(val)
        return cls(kind=kind, **kwargs)

    def tokens(self) -> str:
        parts = [self.kind, f"L={self.lags}"]
        if self.kind in ("fwf_lm", "fwf_fp", "klms", "krls"):
            parts.append(f"sigma={self.sigma:g}")
        if self.kind in ("fwf_lm", "fwf_fp"):
            parts.append(f"cond={self.target_condition:g}")
            if self.centered:
                parts.append("centered=1")
        if self.kind == "fwf_lm":
            parts.append(f"K={self.K}")
            if self.scale != "mean":
                parts.append(f"scale={self.scale}")
            if self.metric != "window":
                parts.append(f"metric={self.metric}")
        if self.kind == "fwf_fp":
            parts.append(f"fp_tol={self.fp_tol:g}")
            parts.append(f"fp_iters={self.fp_iters}")
            if self.fp_init != "last-sample":
                parts.append(f"fp_init={self.fp_init}")
        if self.kind == "klms":
            parts.append(f"eta={self.eta:g}")
        if self.kind in ("wiener", "krls"):
            parts.append(f"ridge={self.ridge:g}")
        if self.kind == "krls" and self.budget is not None:
            parts.append(f"budget={self.budget}")
        return " ".join(parts)

    @property
    def label(self) -> str:
        # doubles as the CSV cell, so tokens stay space-separated
        return self.tokens()


@dataclass(frozen=True)
class ExperimentConfig:
    generator: str = "mg"  # mg | lorenz | file
    gen_params: dict = field(default_factory=dict)
    source: str | None = None  # series CSV path when generator == "file"
    n: int = 2000
    horizon: int = 1
    folds: int = 5
    seed: int = 0
    noise_std: float = 0.0
    transform: str = "none"  # none | standardize | rescale
    filters: tuple = ()

    def __post_init__(self):
        if self.generator not in ("mg", "lorenz", "file"):
            raise DataError(f"unknown generator {self.generator!r}")
        if self.transform not in ("none", "standardize", "rescale"):
            raise DataError(f"unknown transform {self.transform!r}")
        object.__setattr__(self, "filters", tuple(self.filters))

    def to_text(self) -> str:
        lines = [
            f"generator={self.generator}",
            f"n={self.n}",
            f"horizon={self.horizon}",
            f"folds={self.folds}",
            f"seed={self.seed}",
            f"noise_std={self.noise_std:g}",
            f"transform={self.transform}",
        ]
        if self.source:
            lines.append(f"source={self.source}")
        for key, val in sorted(self.gen_params.items()):
            lines.append(f"{self.generator}.{key}={val:g}")
        for i, spec in enumerate(self.filters, 1):
            lines.append(f"filter{i}={spec.tokens()}")
        return "\n".join(lines) + "\n"

    @classmethod
    def from_text(cls, text: str) -> "ExperimentConfig":
        kwargs = {"gen_params": {}, "filters": []}
        for raw in text.splitlines():
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise DataFormatError(f"bad config line {line!r}")
            key, val = (s.strip() for s in line.split("=", 1))
            if key.startswith("filter"):
                kwargs["filters"].append(FilterSpec.parse(val))
            elif "." in key:
                gen, pname = key.split(".", 1)
                kwargs["gen_params"][pname] = float(val)
            elif key in ("n", "horizon", "folds", "seed"):
                kwargs[key] = int(val)
            elif key == "noise_std":
                kwargs[key] = float(val)
            elif key in ("generator", "transform", "source"):
                kwargs[key] = val
            else:
                raise DataFormatError(f"unknown config key {key!r}")
        return cls(**kwargs)


def build_series(config: ExperimentConfig) -> tuple[TimeSeries, TimeSeries]:
    """Realize (inputs, clean_targets) for a config.

    Noise (when configured) lands on the input copy only; targets are
    always drawn from the clean series. Transforms apply before noise
    so the noise std is on the working amplitude scale.
    """
    if config.generator == "mg":
        params = {**MG_DEFAULTS, **config.gen_params}
        params["n"] = int(params.pop("n", config.n))
        params["subsample"] = int(params["subsample"])
        params["discard"] = int(params["discard"])
        clean = generate_mackey_glass(**params)
    elif config.generator == "lorenz":
        params = {**LORENZ_DEFAULTS, **config.gen_params}
        params["n"] = int(params.pop("n", config.n))
        params["discard"] = int(params["discard"])
        clean = generate_lorenz_x(**params)
    else:
        if not config.source:
            raise DataError("generator=file needs a source path")
        clean = series_from_csv(config.source)
        if len(clean) > config.n:
            clean = TimeSeries(clean.samples[:config.n], dt=clean.dt, origin="file")
    if config.transform == "standardize":
        clean = standardize(clean)
    elif config.transform == "rescale":
        clean = rescale(clean)
    noisy = add_gaussian_noise(clean, config.noise_std, seed=config.seed) \
        if config.noise_std > 0 else clean
    return noisy, clean


def make_dataset(noisy: TimeSeries, clean: TimeSeries, lags: int,
                 horizon: int) -> SupervisedDataset:
    """Embed noisy inputs against clean targets."""
    ds = embed(noisy, lags, horizon)
    if clean is not noisy:
        ds = SupervisedDataset(inputs=ds.inputs,
                               targets=clean.samples[ds.anchors + horizon],
                               anchors=ds.anchors, horizon=horizon)
    return ds


def fold_membership(ds: SupervisedDataset, test_lo: int, test_hi: int):
    """Train/test dataset indices for a raw-sample test block [lo, hi).

    Folds are defined on raw sample positions so filters with different
    lag counts score the same stretch of signal: a window belongs to
    the test fold when its target sample falls inside the block.
    """
    tgt = ds.anchors + ds.horizon
    te = (tgt >= test_lo) & (tgt < test_hi)
    return np.nonzero(~te)[0], np.nonzero(te)[0]


def anchor_chunks(noisy: TimeSeries, clean: TimeSeries,
                  anchors: np.ndarray, lags: int, horizon: int):
    """Aligned (input, target) chunk arrays for contiguous anchor runs."""
    if anchors.size == 0:
        raise InsufficientDataError("no training anchors in this fold")
    breaks = np.nonzero(np.diff(anchors) != 1)[0]
    starts = np.concatenate(([0], breaks + 1))
    stops = np.concatenate((breaks + 1, [anchors.size]))
    xs, zs = [], []
    for s, e in zip(starts, stops):
        ia, ib = int(anchors[s]), int(anchors[e - 1])
        xs.append(noisy.samples[ia - lags + 1:ib + 1])
        zs.append(clean.samples[ia - lags + 1 + horizon:ib + 1 + horizon])
    return xs, zs


def mse(predictions, targets) -> float:
    p = np.asarray(predictions, dtype=np.float64)
    t = np.asarray(targets, dtype=np.float64)
    if p.shape != t.shape:
        raise DataError(f"length mismatch: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise DataError("empty sequences")
    d = p - t
    return float(d @ d / p.size)


def train_filter(spec: FilterSpec, noisy: TimeSeries, clean: TimeSeries,
                 ds_train: SupervisedDataset):
    """Fit one filter; returns (state, batch_predictor)."""
    if spec.kind in ("fwf_lm", "fwf_fp"):
        xs, zs = anchor_chunks(noisy, clean, ds_train.anchors, spec.lags,
                               ds_train.horizon)
        model = fwf_core.fit(
            xs, zs, spec.lags, KernelConfig(spec.sigma),
            target_condition=spec.target_condition, horizon=ds_train.horizon,
            centered=spec.centered, training=ds_train)
        if spec.kind == "fwf_fp":
            strat = preimage.FP(preimage.FixedPointConfig(
                max_iters=spec.fp_iters, tol=spec.fp_tol, init=spec.fp_init))
        else:
            index = preimage.build_local_index(model)
            strat = preimage.LM(index, preimage.LocalModelConfig(
                K=spec.K, scale=spec.scale, metric=spec.metric))
        return model, lambda test: preimage.predict_series(model, strat, test)
    if spec.kind == "wiener":
        model = baselines.wiener_fit(ds_train, ridge=spec.ridge)
        return model, lambda test: baselines.wiener_predict_batch(model, test.inputs)
    if spec.kind == "klms":
        model = baselines.klms_train(ds_train, eta=spec.eta, sigma=spec.sigma)
        return model, lambda test: baselines.klms_predict_batch(model, test.inputs)
    if spec.kind == "krls":
        model = baselines.krls_train(ds_train, ridge=spec.ridge,
                                     sigma=spec.sigma, budget=spec.budget)
        return model, lambda test: baselines.krls_predict_batch(model, test.inputs)
    raise DataError(f"unknown filter kind {spec.kind!r}")


@dataclass(frozen=True)
class FoldCell:
    label: str
    fold: int
    mse: float
    train_s: float
    test_s_per_sample: float
    n_train: int
    n_test: int
    failed: bool = False
    error: str = ""


@dataclass(frozen=True)
class EvalReport:
    config: ExperimentConfig
    cells: tuple

    def labels(self):
        seen = []
        for c in self.cells:
            if c.label not in seen:
                seen.append(c.label)
        return seen

    def fold_mses(self, label) -> np.ndarray:
        return np.array([c.mse for c in self.cells
                         if c.label == label and not c.failed])

    def mean_mse(self, label) -> float:
        vals = self.fold_mses(label)
        if vals.size == 0:
            return float("nan")
        return float(np.mean(vals))

    def std_mse(self, label) -> float:
        vals = self.fold_mses(label)
        if vals.size == 0:
            return float("nan")
        return float(np.std(vals))

    def csv_text(self) -> str:
        lines = ["filter,fold,mse,n_train,n_test,failed,error"]
        for c in self.cells:
            err = c.error.replace(",", ";").replace("\n", " ")
            lines.append(f"{c.label},{c.fold},{fmt(c.mse)},{c.n_train},"
                         f"{c.n_test},{int(c.failed)},{err}")
        return "\n".join(lines) + "\n"

    def timings_csv_text(self) -> str:
        lines = ["filter,fold,train_ms,test_ms_per_sample"]
        for c in self.cells:
            lines.append(f"{c.label},{c.fold},{fmt(c.train_s * 1e3)},"
                         f"{fmt(c.test_s_per_sample * 1e3)}")
        return "\n".join(lines) + "\n"

    def summary_text(self) -> str:
        lines = ["filter                                   mean_mse     std_mse"]
        for label in self.labels():
            lines.append(f"{label:40s} {self.mean_mse(label):.6g}  {self.std_mse(label):.6g}")
        return "\n".join(lines)


def run_cv(config: ExperimentConfig) -> EvalReport:
    """K-fold cross-validation of every configured filter.

    One filter's failure marks only its own cells failed; the fold loop
    carries on for the rest.
    """
    if not config.filters:
        raise DataError("config has no filters")
    noisy, clean = build_series(config)
    folds = kfold_split(len(noisy), config.folds)
    datasets = {}
    for spec in config.filters:
        key = spec.lags
        if key not in datasets:
            datasets[key] = make_dataset(noisy, clean, spec.lags, config.horizon)
    cells = []
    for spec in config.filters:
        ds = datasets[spec.lags]
        for fold_id, (_, test_raw) in enumerate(folds):
            tr_idx, te_idx = fold_membership(ds, int(test_raw[0]),
                                             int(test_raw[-1]) + 1)
            ds_train, ds_test = ds.subset(tr_idx), ds.subset(te_idx)
            try:
                t0 = time.perf_counter()
                _, predictor = train_filter(spec, noisy, clean, ds_train)
                train_s = time.perf_counter() - t0
                t0 = time.perf_counter()
                preds = predictor(ds_test)
                test_s = (time.perf_counter() - t0) / max(len(ds_test), 1)
                cells.append(FoldCell(
                    label=spec.label, fold=fold_id, mse=mse(preds, ds_test.targets),
                    train_s=train_s, test_s_per_sample=test_s,
                    n_train=len(ds_train), n_test=len(ds_test)))
            except FwfError as exc:
                cells.append(FoldCell(
                    label=spec.label, fold=fold_id, mse=float("nan"),
                    train_s=float("nan"), test_s_per_sample=float("nan"),
                    n_train=len(ds_train), n_test=len(ds_test),
                    failed=True, error=f"{type(exc).__name__}: {exc}"))
    return EvalReport(config=config, cells=tuple(cells))


@dataclass(frozen=True)
class ScanSurface:
    """Training-MSE surface over (sigma, lags) per local-model order K."""

    rows: tuple  # of (sigma, lags, K, train_mse)

    def csv_text(self) -> str:
        lines = ["sigma,lags,K,train_mse,log10_mse"]
        for s, L, K, v in self.rows:
            log10 = fmt(np.log10(v)) if np.isfinite(v) and v > 0 else "nan"
            lines.append(f"{fmt(s)},{L},{K},{fmt(v)},{log10}")
        return "\n".join(lines) + "\n"

    def argmin(self):
        finite = [r for r in self.rows if np.isfinite(r[3])]
        if not finite:
            raise DataError("surface has no finite cells")
        return min(finite, key=lambda r: (r[3], r[0], r[1], r[2]))

    def argmin_for(self, K):
        finite = [r for r in self.rows if r[2] == K and np.isfinite(r[3])]
        if not finite:
            raise DataError(f"surface has no finite cells for K={K}")
        return min(finite, key=lambda r: (r[3], r[0], r[1]))

    def value(self, sigma, lags, K) -> float:
        for s, L, k, v in self.rows:
            if (s, L, k) == (sigma, lags, K):
                return v
        raise KeyError((sigma, lags, K))

    def svg_text(self) -> str:
        ks = sorted({r[2] for r in self.rows})
        xs = sorted({r[0] for r in self.rows})
        ys = sorted({r[1] for r in self.rows})
        values = {f"K={k}": {} for k in ks}
        for s, L, K, v in self.rows:
            values[f"K={K}"][(s, L)] = v
        return svg.heatmap_svg(xs, ys, values, [f"K={k}" for k in ks],
                               title="training MSE surface",
                               xlabel="kernel size", ylabel="lags")


def scan_hyperparameters(base: ExperimentConfig, sigmas, lags_grid) -> ScanSurface:
    """Training-set error surface of the local-model filter.

    One row per (sigma, lags, K) combination, K taken from each fwf_lm
    spec in the base config; degenerate cells (embedding longer than
    the data) carry NaN so a bad corner never aborts the scan.
    """
    lm_specs = [s for s in base.filters if s.kind == "fwf_lm"]
    if not lm_specs:
        raise DataError("scan needs at least one fwf_lm filter in the config")
    if not len(sigmas) or not len(lags_grid):
        raise DataError("empty scan grid")
    noisy, clean = build_series(base)
    rows = []
    for spec in lm_specs:
        for lags in lags_grid:
            try:
                ds = make_dataset(noisy, clean, int(lags), base.horizon)
            except FwfError:
                rows.extend((float(s), int(lags), spec.K, float("nan"))
                            for s in sigmas)
                continue
            for s in sigmas:
                cell = replace(spec, sigma=float(s), lags=int(lags))
                try:
                    _, predictor = train_filter(cell, noisy, clean, ds)
                    rows.append((float(s), int(lags), spec.K,
                                 mse(predictor(ds), ds.targets)))
                except FwfError:
                    rows.append((float(s), int(lags), spec.K, float("nan")))
    return ScanSurface(rows=tuple(rows))


@dataclass(frozen=True)
class NoiseStudy:
    levels: tuple
    reports: tuple  # EvalReport per level

    def report(self, level) -> EvalReport:
        return self.reports[self.levels.index(level)]

    def mean_mse(self, level, label) -> float:
        return self.report(level).mean_mse(label)

    def csv_text(self) -> str:
        lines = ["noise_std,filter,fold,mse"]
        for level, rep in zip(self.levels, self.reports):
            for c in rep.cells:
                lines.append(f"{fmt(level)},{c.label},{c.fold},{fmt(c.mse)}")
        return "\n".join(lines) + "\n"

    def svg_text(self) -> str:
        labels = self.reports[0].labels()
        curves = {lab: [(lv, self.mean_mse(lv, lab)) for lv in self.levels]
                  for lab in labels}
        return svg.lines_svg(curves, title="noise robustness",
                             xlabel="input noise std", ylabel="mean test MSE",
                             logx=False, logy=True)


def run_noise_study(base: ExperimentConfig, levels) -> NoiseStudy:
    """run_cv at each input-noise level (targets stay clean throughout)."""
    reports = []
    for level in levels:
        if level < 0:
            raise DataError("noise level must be >= 0")
        reports.append(run_cv(replace(base, noise_std=float(level))))
    return NoiseStudy(levels=tuple(float(v) for v in levels),
                      reports=tuple(reports))


@dataclass(frozen=True)
class ScalingRow:
    label: str
    n_train: int
    train_s: float
    test_s_per_sample: float
    mse: float


@dataclass(frozen=True)
class ScalingTable:
    rows: tuple
    test_count: int

    def csv_text(self) -> str:
        lines = ["filter,n_train,train_ms,test_ms_per_sample,mse"]
        for r in self.rows:
            lines.append(f"{r.label},{r.n_train},{fmt(r.train_s * 1e3)},"
                         f"{fmt(r.test_s_per_sample * 1e3)},{fmt(r.mse)}")
        return "\n".join(lines) + "\n"

    def labels(self):
        seen = []
        for r in self.rows:
            if r.label not in seen:
                seen.append(r.label)
        return seen

    def slope(self, label) -> float:
        """Log-log slope of per-sample test time versus training size."""
        pts = [(r.n_train, r.test_s_per_sample) for r in self.rows
               if r.label == label and np.isfinite(r.test_s_per_sample)]
        if len(pts) < 2:
            raise DataError(f"not enough points to fit a slope for {label!r}")
        x = np.log([p[0] for p in pts])
        y = np.log([p[1] for p in pts])
        return float(np.polyfit(x, y, 1)[0])

    def svg_text(self) -> str:
        curves = {lab: [(r.n_train, r.mse) for r in self.rows if r.label == lab]
                  for lab in self.labels()}
        return svg.lines_svg(curves, title="test MSE vs training size",
                             xlabel="training samples", ylabel="mean test MSE",
                             logx=True, logy=True)


def run_scaling_study(config: ExperimentConfig, train_sizes,
                      test_count: int = 500, timing_reps: int = 5) -> ScalingTable:
    """Train/test cost versus training size.

    Per-sample test time is the median over ``timing_reps`` full passes
    on a fixed-size held-out block (warm cache; one untimed warm-up
    pass); training is timed once. Timing runs execute serially.
    """
    if not config.filters:
        raise DataError("config has no filters")
    sizes = [int(n) for n in train_sizes]
    if not sizes:
        raise DataError("no training sizes given")
    max_lags = max(s.lags for s in config.filters)
    rows = []
    for n in sizes:
        total = n + test_count + max_lags + config.horizon
        noisy, clean = build_series(replace(config, n=total))
        for spec in config.filters:
            ds = make_dataset(noisy, clean, spec.lags, config.horizon)
            tr_idx, te_idx = fold_membership(ds, n, len(noisy))
            ds_train, ds_test = ds.subset(tr_idx), ds.subset(te_idx)
            try:
                t0 = time.perf_counter()
                _, predictor = train_filter(spec, noisy, clean, ds_train)
                train_s = time.perf_counter() - t0
                preds = predictor(ds_test)  # warm-up, also scores MSE
                reps = []
                for _ in range(timing_reps):
                    t0 = time.perf_counter()
                    predictor(ds_test)
                    reps.append((time.perf_counter() - t0) / len(ds_test))
                rows.append(ScalingRow(
                    label=spec.label, n_train=len(ds_train), train_s=train_s,
                    test_s_per_sample=float(np.median(reps)),
                    mse=mse(preds, ds_test.targets)))
            except FwfError:
                rows.append(ScalingRow(label=spec.label, n_train=n,
                                       train_s=float("nan"),
                                       test_s_per_sample=float("nan"),
                                       mse=float("nan")))
    return ScalingTable(rows=tuple(rows), test_count=test_count)


def emit(obj, fmt_name: str, path) -> None:
    """Write a report/surface/table as CSV or SVG (atomic)."""
    if fmt_name == "csv":
        text = obj.csv_text()
    elif fmt_name in ("svg", "svg-plot"):
        if not hasattr(obj, "svg_text"):
            raise DataError(f"{type(obj).__name__} has no plot form")
        text = obj.svg_text()
    else:
        raise DataError(f"unknown emit format {fmt_name!r}")
    atomic_write(path, text)
