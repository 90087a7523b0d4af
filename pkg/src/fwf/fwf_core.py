"""Closed-form correntropy-domain filter.

Pipeline: lagged autocorrentropy -> symmetric Toeplitz matrix V ->
diagonal-shift regularization to a target condition number -> direct
SPD solve of V_reg w = rho_z. The weight vector then defines an
RKHS-valued output functional evaluated with exactly L kernel
evaluations per test window, independent of training-set size.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import backend
from .correntropy import (
    CorrentropyVector,
    CrossCorrentropyVector,
    KernelConfig,
    autocorrentropy,
    center_correntropy,
    cross_correntropy,
)
from .errors import (
    AlignmentError,
    DataError,
    DecompositionError,
    DegenerateMatrixError,
)
from .signal import SupervisedDataset, TimeSeries, embed

RESIDUAL_RTOL = 1e-8
DEFAULT_TARGET_CONDITION = 30.0


@dataclass(frozen=True)
class RegularizationRecord:
    """Diagonal shift applied to V and the spectrum it was derived from."""

    lam: float  # additive ridge (the "lambda" of V_reg = V + lambda I)
    gamma: float  # lam / min-eigenvalue; inf when the minimum is <= 0
    target_condition: float
    achieved_condition: float
    eig_min: float
    eig_max: float


@dataclass(frozen=True)
class CorrentropyMatrix:
    """L x L symmetric Toeplitz matrix stored as its first row."""

    first_row: np.ndarray
    reg: RegularizationRecord | None = None

    @property
    def order(self) -> int:
        return len(self.first_row)

    def dense(self) -> np.ndarray:
        return scipy.linalg.toeplitz(self.first_row)

    def __getitem__(self, ij):
        i, j = ij
        return self.first_row[abs(i - j)]


@dataclass(frozen=True)
class FwfModel:
    """Fitted filter state.

    ``weights`` solves V_reg w = rho with infinity-norm residual at most
    RESIDUAL_RTOL * |rho|_inf (checked at fit time). ``training`` is the
    embedded training set retained for the local-model preimage; None
    when the model is used with fixed-point pre-imaging only.
    """

    weights: np.ndarray
    sigma: float
    lags: int
    horizon: int
    reg: RegularizationRecord
    rho: CrossCorrentropyVector
    v: CorrentropyVector
    centered: bool = False
    training: SupervisedDataset | None = None

    @property
    def config(self) -> KernelConfig:
        return KernelConfig(sigma=self.sigma)


def build_matrix(v) -> CorrentropyMatrix:
    """Assemble the Toeplitz autocorrentropy matrix V[i, j] = v_|i-j|."""
    row = v.values if isinstance(v, CorrentropyVector) else np.asarray(v, dtype=np.float64)
    if row.size == 0:
        raise DataError("correntropy vector is empty")
    return CorrentropyMatrix(first_row=np.array(row, dtype=np.float64))


def regularize(V: CorrentropyMatrix, target_condition: float = DEFAULT_TARGET_CONDITION) -> CorrentropyMatrix:
    """Shift the diagonal so the condition number hits the target exactly.

    With eigenvalue extremes (e_min, e_max) of V, the shift
    lam = (e_max - target * e_min) / (target - 1) puts the condition
    number of V + lam I at the target; matrices already at or below the
    target pass through unchanged (lam = 0). A non-positive e_min is
    clamped to zero in the shift formula and gamma is reported as inf.
    """
    if not (target_condition > 1):
        raise DataError("target_condition must exceed 1")
    eigs = scipy.linalg.eigvalsh(V.dense())
    e_min, e_max = float(eigs[0]), float(eigs[-1])
    if e_max <= 0:
        raise DegenerateMatrixError(
            f"matrix has no positive eigenvalue (max = {e_max:g})")
    cond = e_max / e_min if e_min > 0 else np.inf
    if cond <= target_condition:
        rec = RegularizationRecord(lam=0.0, gamma=0.0,
                                   target_condition=target_condition,
                                   achieved_condition=cond,
                                   eig_min=e_min, eig_max=e_max)
        return CorrentropyMatrix(first_row=V.first_row, reg=rec)
    floor = max(e_min, 0.0)
    lam = (e_max - target_condition * floor) / (target_condition - 1.0)
    achieved = (e_max + lam) / (e_min + lam)
    gamma = lam / e_min if e_min > 0 else np.inf
    rec = RegularizationRecord(lam=lam, gamma=gamma,
                               target_condition=target_condition,
                               achieved_condition=achieved,
                               eig_min=e_min, eig_max=e_max)
    row = V.first_row.copy()
    row[0] += lam
    return CorrentropyMatrix(first_row=row, reg=rec)


def _solve_spd(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    try:
        cf = scipy.linalg.cho_factor(matrix, lower=True)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(f"SPD factorization failed: {exc}") from exc
    w = scipy.linalg.cho_solve(cf, rhs)
    # one refinement step keeps the residual contract with margin
    resid = rhs - matrix @ w
    w = w + scipy.linalg.cho_solve(cf, resid)
    return w


def fit(inputs, targets, lags: int, config: KernelConfig,
        target_condition: float = DEFAULT_TARGET_CONDITION,
        horizon: int = 1, centered: bool = False,
        training: SupervisedDataset | None = None) -> FwfModel:
    """Solve for the optimal weights from aligned input/target samples.

    ``inputs`` and ``targets`` are aligned 1-D arrays (target[t] is the
    prediction goal for input time t), or equal-structure lists of
    contiguous chunks when the training region is not one run (fold
    interiors). Cost is O(N L + L^2) kernel evaluations plus one dense
    L x L solve; nothing grows with more data afterwards.

    ``centered`` subtracts the RKHS mean term from both v and rho
    (both-or-neither, never just one side).
    """
    v = autocorrentropy(inputs, lags, config)
    rho = cross_correntropy(inputs, targets, lags, config)
    if centered:
        v = center_correntropy(v, inputs, config)
        m_cross = _cross_mean(inputs, targets, config)
        rho = CrossCorrentropyVector(values=rho.values - m_cross,
                                     sigma=rho.sigma, normalized=rho.normalized)
    V = regularize(build_matrix(v), target_condition)
    w = _solve_spd(V.dense(), rho.values)
    resid = np.max(np.abs(V.dense() @ w - rho.values))
    bound = RESIDUAL_RTOL * np.max(np.abs(rho.values))
    if resid > bound:
        raise DecompositionError(
            f"solver residual {resid:.3e} exceeds contract {bound:.3e}")
    return FwfModel(weights=w, sigma=config.sigma, lags=lags, horizon=horizon,
                    reg=V.reg, rho=rho, v=v, centered=centered, training=training)


def _cross_mean(inputs, targets, config: KernelConfig) -> float:
    # centering analog for rho: all-pairs mean of G(x(t), z(s))
    xs = inputs if isinstance(inputs, (list, tuple)) else [inputs]
    zs = targets if isinstance(targets, (list, tuple)) else [targets]
    x = np.concatenate([np.asarray(getattr(c, "samples", c), dtype=np.float64) for c in xs])
    z = np.concatenate([np.asarray(getattr(c, "samples", c), dtype=np.float64) for c in zs])
    inv = 0.5 / (config.sigma ** 2)
    total = 0.0
    for a in range(0, x.size, 512):
        d = x[a:a + 512, None] - z[None, :]
        total += float(np.exp(-inv * d * d).sum())
    return config.scale * total / (x.size * z.size)


def fit_series(series: TimeSeries, lags: int, config: KernelConfig,
               horizon: int = 1,
               target_condition: float = DEFAULT_TARGET_CONDITION,
               centered: bool = False,
               targets_series: TimeSeries | None = None) -> FwfModel:
    """Fit from one raw series; retains its embedding for pre-imaging.

    ``targets_series`` lets targets come from a clean copy while inputs
    carry measurement noise (same length, same sampling).
    """
    x = series.samples
    z_src = targets_series.samples if targets_series is not None else x
    if z_src.size != x.size:
        raise AlignmentError("targets series must match the input series length")
    n = x.size
    if n <= lags + horizon:
        raise DataError(f"series of length {n} too short for lags={lags}, horizon={horizon}")
    inputs = x[:n - horizon] if horizon else x
    targets = z_src[horizon:] if horizon else z_src
    dataset = embed(series, lags, horizon)
    if targets_series is not None:
        dataset = SupervisedDataset(inputs=dataset.inputs,
                                    targets=z_src[dataset.anchors + horizon],
                                    anchors=dataset.anchors, horizon=horizon)
    return fit(inputs, targets, lags, config, target_condition=target_condition,
               horizon=horizon, centered=centered, training=dataset)


def evaluate_functional(model: FwfModel, window, y: float) -> float:
    """Evaluate the fitted RKHS output function at the point ``y``.

    Exactly ``model.lags`` kernel evaluations; the result is
    sum_tau w(tau) G(window[tau], y) for the most-recent-first window.
    """
    window = np.ascontiguousarray(window, dtype=np.float64)
    if window.shape != (model.lags,):
        raise AlignmentError(
            f"window has shape {window.shape}, expected ({model.lags},)")
    return backend.functional_eval(window, model.weights, model.sigma, float(y))
