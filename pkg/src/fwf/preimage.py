"""Pre-imaging: map the RKHS-valued filter output back to a scalar.

Two strategies. The fixed-point route iterates the weighted-Gaussian
mean-shift update on the test window alone. The local-model route pairs
every training anchor, once, with the partner anchor whose kernel
combination best reproduces the anchor's target, then answers test
queries from the K amplitude-nearest anchors with a target-ratio
rescale.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from . import backend
from .errors import AlignmentError, DataError, InsufficientDataError
from .fwf_core import FwfModel
from .signal import SupervisedDataset

DENOM_FLOOR = 1e-12


@dataclass(frozen=True)
class FixedPointConfig:
    max_iters: int = 50
    tol: float = 1e-6
    init: str = "last-sample"  # or "weighted-mean"

    def __post_init__(self):
        if self.max_iters < 1:
            raise DataError("max_iters must be >= 1")
        if not (self.tol > 0):
            raise DataError("tol must be positive")
        if self.init not in ("last-sample", "weighted-mean"):
            raise DataError(f"unknown init rule {self.init!r}")


@dataclass(frozen=True)
class FixedPointResult:
    y: float
    iters: int
    converged: bool
    degenerate: bool = False


@dataclass(frozen=True)
class LocalModelConfig:
    """Local-model prediction knobs.

    The probe metric defaults to full-window Euclidean distance
    (kd-tree lookup): matching only the current-sample amplitude is
    also available but confuses rising and falling phases of an
    oscillation and costs an order of magnitude in test error on the
    chaotic benchmarks.
    """

    K: int = 1
    scale: str = "mean"  # "mean" (z_k / zbar) or "per-probe" (z_k / zhat_k)
    metric: str = "window"  # probe lookup: "window" or "amplitude"

    def __post_init__(self):
        if self.K < 1:
            raise DataError("K must be >= 1")
        if self.scale not in ("mean", "per-probe"):
            raise DataError(f"unknown scale rule {self.scale!r}")
        if self.metric not in ("amplitude", "window"):
            raise DataError(f"unknown probe metric {self.metric!r}")


@dataclass(frozen=True)
class LocalModelIndex:
    """Per-anchor best-pair table with sub-linear probe lookups.

    Row r describes the training window anchored at ``anchors[r]``: its
    best partner row ``partner_rows[r]``, the training target ``z[r]``
    and the achieved approximation ``zhat[r]``. Probe queries stay
    O(K + log N): a kd-tree over the windows serves the full-window
    metric, an amplitude-sorted array serves the scalar metric.
    """

    anchors: np.ndarray
    partner_rows: np.ndarray
    z: np.ndarray
    zhat: np.ndarray
    windows: np.ndarray
    amp_order: np.ndarray = field(repr=False, default=None)
    sorted_amps: np.ndarray = field(repr=False, default=None)
    tree: cKDTree = field(repr=False, compare=False, default=None)

    def __post_init__(self):
        if self.amp_order is None:
            order = np.argsort(self.windows[:, 0], kind="stable")
            object.__setattr__(self, "amp_order", order)
            object.__setattr__(self, "sorted_amps", self.windows[order, 0])
        if self.tree is None:
            object.__setattr__(self, "tree", cKDTree(self.windows))

    def __len__(self):
        return len(self.anchors)

    @property
    def partner_anchors(self) -> np.ndarray:
        return self.anchors[self.partner_rows]


def _fp_start(model: FwfModel, window: np.ndarray, config: FixedPointConfig) -> float:
    if config.init == "last-sample":
        return float(window[0])
    wsum = float(model.weights.sum())
    if abs(wsum) < DENOM_FLOOR:
        return float(window[0])
    return float(model.weights @ window) / wsum


def fixed_point_preimage(model: FwfModel, window,
                         config: FixedPointConfig = FixedPointConfig()) -> FixedPointResult:
    """Iterate y <- sum w G(x, y) x / sum w G(x, y) until |dy| < tol.

    With all-positive weights every iterate is a convex combination of
    the window values, hence stays inside [min(window), max(window)].
    A collapsing denominator (mixed-sign weight cancellation) stops the
    iteration and flags the result degenerate instead of dividing.
    """
    window = np.ascontiguousarray(window, dtype=np.float64)
    if window.shape != (model.lags,):
        raise AlignmentError(
            f"window has shape {window.shape}, expected ({model.lags},)")
    y0 = _fp_start(model, window, config)
    y, iters, converged, degenerate, _ = backend.fp_iterate(
        window, model.weights, model.sigma, y0, config.tol, config.max_iters,
        DENOM_FLOOR)
    return FixedPointResult(y=float(y), iters=int(iters),
                            converged=bool(converged), degenerate=bool(degenerate))


def fixed_point_trajectory(model: FwfModel, window,
                           config: FixedPointConfig = FixedPointConfig()) -> np.ndarray:
    """All iterates produced by the update (diagnostic / property checks)."""
    window = np.ascontiguousarray(window, dtype=np.float64)
    y0 = _fp_start(model, window, config)
    _, _, _, _, traj = backend.fp_iterate(
        window, model.weights, model.sigma, y0, config.tol, config.max_iters,
        DENOM_FLOOR)
    return traj


def build_local_index(model: FwfModel,
                      training: SupervisedDataset | None = None) -> LocalModelIndex:
    """One-off best-partner search over the training set.

    For each anchor i the partner m minimizes
    |z(i) - sum_tau w(tau) G(x(i-tau), x(m-tau))| over all training
    anchors (lowest index on ties). O(N^2 L) kernel evaluations.
    """
    training = training if training is not None else model.training
    if training is None or len(training) == 0:
        raise InsufficientDataError("no training data available for the local index")
    if training.lags != model.lags:
        raise AlignmentError("training embedding does not match the model's lag count")
    partners, zhat = backend.local_index_search(
        training.inputs, training.targets, model.weights, model.sigma)
    return LocalModelIndex(anchors=training.anchors.astype(np.int64),
                           partner_rows=partners,
                           z=np.array(training.targets, dtype=np.float64),
                           zhat=zhat,
                           windows=training.inputs)


def _nearest_rows_amplitude(index: LocalModelIndex, query: float, k: int) -> np.ndarray:
    """Rows of the k amplitude-nearest anchors.

    Two-pointer walk outward from the insertion point in the sorted
    amplitudes (O(log N + k)), then widened across exact distance ties
    so the lowest anchor index deterministically wins a tie for the
    last slot.
    """
    amps = index.sorted_amps
    n = amps.size
    pos = int(np.searchsorted(amps, query))
    lo, hi = pos - 1, pos
    picked = []
    for _ in range(k):
        if lo < 0 and hi >= n:
            break
        if hi >= n or (lo >= 0 and abs(query - amps[lo]) <= abs(amps[hi] - query)):
            picked.append(lo); lo -= 1
        else:
            picked.append(hi); hi += 1
    kth = max(abs(amps[p] - query) for p in picked)
    while lo >= 0 and abs(query - amps[lo]) == kth:
        picked.append(lo); lo -= 1
    while hi < n and abs(amps[hi] - query) == kth:
        picked.append(hi); hi += 1
    rows = index.amp_order[np.array(picked, dtype=np.intp)]
    dist = np.abs(index.windows[rows, 0] - query)
    order = np.lexsort((index.anchors[rows], dist))
    return rows[order[:k]]


def _nearest_rows_window(index: LocalModelIndex, window: np.ndarray, k: int) -> np.ndarray:
    _, rows = index.tree.query(window, k=k)
    return np.atleast_1d(rows)


def nearest_rows_linear(index: LocalModelIndex, window: np.ndarray, k: int) -> np.ndarray:
    """Exhaustive-scan probe lookup (oracle for the tree/sorted paths)."""
    d = index.windows - np.asarray(window, dtype=np.float64)[None, :]
    dist = np.einsum("ij,ij->i", d, d)
    order = np.lexsort((index.anchors, dist))
    return order[:k]


def local_model_predict(model: FwfModel, index: LocalModelIndex, window,
                        config: LocalModelConfig = LocalModelConfig(),
                        training: SupervisedDataset | None = None) -> float:
    """Local-model output for one test window.

    Probes the K training anchors nearest the window's current sample,
    evaluates u_k = sum_tau w(tau) G(x(m_k - tau), window[tau]) through
    each probe's stored partner, and rescales by the target ratio:
    (z/zhat) u for K = 1, mean over K of (z_k / zbar) u_k otherwise
    (zbar = mean of the stored zhat values of the probes).
    """
    window = np.ascontiguousarray(window, dtype=np.float64)
    if window.shape != (model.lags,):
        raise AlignmentError(
            f"window has shape {window.shape}, expected ({model.lags},)")
    k = config.K
    n = len(index)
    if k > n:
        warnings.warn(f"K={k} exceeds the {n} training anchors; clamping")
        k = n
    if config.metric == "amplitude":
        rows = _nearest_rows_amplitude(index, float(window[0]), k)
    else:
        rows = _nearest_rows_window(index, window, k)
    return _compose(model, index, window, rows, config)


def _compose(model, index, window, rows, config):
    """Blend the probes' partner evaluations with target-ratio rescaling."""
    u = np.array([backend.weighted_window_eval(
        index.windows[index.partner_rows[r]], window, model.weights, model.sigma)
        for r in rows])
    z = index.z[rows]
    zhat = index.zhat[rows]
    if config.scale == "per-probe":
        scale_ref = zhat
    else:
        scale_ref = np.full(len(rows), zhat.mean())
    ratios = np.empty(len(rows))
    for i in range(len(rows)):
        if abs(scale_ref[i]) < DENOM_FLOOR:
            warnings.warn("stored approximation near zero; probe scale clamped to 1")
            ratios[i] = 1.0
        else:
            ratios[i] = z[i] / scale_ref[i]
    return float(np.mean(ratios * u))


@dataclass(frozen=True)
class FP:
    """Fixed-point pre-imaging strategy for :func:`predict_series`."""
    config: FixedPointConfig = FixedPointConfig()


@dataclass(frozen=True)
class LM:
    """Local-model pre-imaging strategy for :func:`predict_series`."""
    index: LocalModelIndex
    config: LocalModelConfig = LocalModelConfig()


def predict_series(model: FwfModel, strategy, test: SupervisedDataset) -> np.ndarray:
    """Apply a pre-imaging strategy to every window of a test set.

    Per-window cost never depends on the training-set size beyond the
    O(log N) probe lookup: the LM branch batches the tree queries up
    front, the FP branch is training-set free by construction.
    """
    if test.lags != model.lags:
        raise AlignmentError("test embedding does not match the model's lag count")
    out = np.empty(len(test))
    if isinstance(strategy, FP):
        for j in range(len(test)):
            out[j] = fixed_point_preimage(model, test.inputs[j], strategy.config).y
    elif isinstance(strategy, LM):
        index, config = strategy.index, strategy.config
        k = min(config.K, len(index))
        if k < config.K:
            warnings.warn(f"K={config.K} exceeds the {len(index)} training anchors; clamping")
        if config.metric == "window" and len(test):
            _, rows_all = index.tree.query(test.inputs, k=k)
            rows_all = rows_all.reshape(len(test), k)
            for j in range(len(test)):
                out[j] = _compose(model, index, test.inputs[j], rows_all[j], config)
        else:
            for j in range(len(test)):
                rows = _nearest_rows_amplitude(index, float(test.inputs[j, 0]), k)
                out[j] = _compose(model, index, test.inputs[j], rows, config)
    else:
        raise DataError(f"unknown prediction strategy {strategy!r}")
    return out
