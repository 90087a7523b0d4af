"""Comparator filters: linear Wiener, KLMS, and KRLS.

The Wiener filter solves the regularized normal equations once; the
two kernel filters are online passes whose dictionaries grow with the
training data (no sparsification), which is exactly the cost profile
the scaling study measures.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import backend
from .errors import (
    AlignmentError,
    DataError,
    DecompositionError,
    InsufficientDataError,
)
from .signal import SupervisedDataset

_WIENER_RESIDUAL_RTOL = 1e-8


@dataclass(frozen=True)
class WienerModel:
    weights: np.ndarray
    ridge: float

    @property
    def lags(self) -> int:
        return len(self.weights)


@dataclass(frozen=True)
class KlmsModel:
    centers: np.ndarray  # (n, L) dictionary, one row per training step
    coeffs: np.ndarray   # eta * e_i per center
    eta: float
    sigma: float

    @property
    def lags(self) -> int:
        return self.centers.shape[1]

    def __len__(self):
        return len(self.coeffs)


@dataclass(frozen=True)
class KrlsModel:
    centers: np.ndarray
    alpha: np.ndarray
    kinv: np.ndarray  # maintained inverse of (K + ridge I) over the dictionary
    ridge: float
    sigma: float

    @property
    def lags(self) -> int:
        return self.centers.shape[1]

    def __len__(self):
        return len(self.alpha)


def wiener_fit(dataset: SupervisedDataset, ridge: float = 0.0) -> WienerModel:
    """Least-squares FIR weights from the biased second-moment estimates.

    Builds R = X^T X / n and p = X^T z / n and solves
    (R + ridge I) w = p; the biased 1/n estimator keeps R positive
    semidefinite. Residual above 1e-8 relative raises.
    """
    X = dataset.inputs
    z = dataset.targets
    n, L = X.shape
    if n <= L:
        raise InsufficientDataError(f"need more than {L} pairs, got {n}")
    if ridge < 0:
        raise DataError("ridge must be >= 0")
    R = (X.T @ X) / n
    p = (X.T @ z) / n
    A = R + ridge * np.eye(L)
    try:
        cf = scipy.linalg.cho_factor(A, lower=True)
    except np.linalg.LinAlgError as exc:
        raise DecompositionError(
            f"normal equations are singular (ridge={ridge:g}): {exc}") from exc
    w = scipy.linalg.cho_solve(cf, p)
    w = w + scipy.linalg.cho_solve(cf, p - A @ w)
    resid = np.max(np.abs(A @ w - p))
    scale = np.max(np.abs(p)) or 1.0
    if resid > _WIENER_RESIDUAL_RTOL * scale:
        raise DecompositionError(
            f"Wiener solve residual {resid:.3e} exceeds {_WIENER_RESIDUAL_RTOL:g} relative")
    return WienerModel(weights=w, ridge=ridge)


def wiener_predict(model: WienerModel, window) -> float:
    window = np.asarray(window, dtype=np.float64)
    if window.shape != (model.lags,):
        raise AlignmentError(f"window has shape {window.shape}, expected ({model.lags},)")
    return float(model.weights @ window)


def klms_train(dataset: SupervisedDataset, eta: float = 0.1,
               sigma: float = 1.0) -> KlmsModel:
    """Single online KLMS pass.

    Step n predicts y_n = sum_{i<n} eta e_i G(x_n, x_i), takes
    e_n = z_n - y_n, and appends x_n with coefficient eta e_n; the
    dictionary ends at exactly one center per training pair.
    """
    if eta <= 0:
        raise DataError("eta must be positive")
    if sigma <= 0:
        raise DataError("sigma must be positive")
    windows = np.ascontiguousarray(dataset.inputs, dtype=np.float64)
    coeffs = backend.klms_train(windows, dataset.targets, eta, sigma)
    return KlmsModel(centers=windows, coeffs=coeffs, eta=eta, sigma=sigma)


def klms_predict(model: KlmsModel, window) -> float:
    window = np.asarray(window, dtype=np.float64)
    if len(model) and window.shape != (model.lags,):
        raise AlignmentError(f"window has shape {window.shape}, expected ({model.lags},)")
    return backend.kernel_sum_eval(model.centers, model.coeffs, window, model.sigma)


def klms_predict_batch(model: KlmsModel, windows) -> np.ndarray:
    windows = np.ascontiguousarray(windows, dtype=np.float64)
    return backend.kernel_sum_eval_batch(model.centers, model.coeffs, windows,
                                         model.sigma)


def krls_train(dataset: SupervisedDataset, ridge: float = 1e-3,
               sigma: float = 1.0, budget: int | None = None) -> KrlsModel:
    """Recursive kernel least squares without sparsification.

    Maintains Q = (K + ridge I)^-1 over the growing dictionary through
    rank-one block updates so that (K + ridge I) alpha = z after every
    step; with an unlimited budget the final model equals batch kernel
    ridge regression. ``budget`` (off by default) drops the oldest
    center once the dictionary would exceed it, purely to bound
    desk-scale cost. A breakdown of the maintained inverse triggers one
    full refactorization before giving up.
    """
    if ridge <= 0:
        raise DataError("ridge must be positive")
    if sigma <= 0:
        raise DataError("sigma must be positive")
    if budget is not None and budget < 1:
        raise DataError("budget must be >= 1 when given")
    X = np.ascontiguousarray(dataset.inputs, dtype=np.float64)
    z = np.asarray(dataset.targets, dtype=np.float64)
    n = len(z)
    if n == 0:
        raise InsufficientDataError("empty training set")
    inv2 = 0.5 / (sigma * sigma)

    cap = n if budget is None else min(budget, n)
    centers = np.empty((cap, X.shape[1]))
    targets = np.empty(cap)
    Q = np.zeros((cap, cap))
    alpha = np.empty(cap)
    m = 0  # live dictionary size

    def kvec(x):
        d = centers[:m] - x[None, :]
        return np.exp(-inv2 * np.einsum("ij,ij->i", d, d))

    def refactor():
        d = centers[:m, None, :] - centers[None, :m, :]
        K = np.exp(-inv2 * np.einsum("ijk,ijk->ij", d, d))
        A = K + ridge * np.eye(m)
        try:
            cf = scipy.linalg.cho_factor(A, lower=True)
        except np.linalg.LinAlgError as exc:
            raise DecompositionError(f"KRLS refactorization failed: {exc}") from exc
        Q[:m, :m] = scipy.linalg.cho_solve(cf, np.eye(m))
        alpha[:m] = Q[:m, :m] @ targets[:m]

    for t in range(n):
        x_t, z_t = X[t], z[t]
        if m == cap:  # budget reached: drop oldest center
            q11 = Q[0, 0]
            if not np.isfinite(q11) or abs(q11) < 1e-300:
                refactor()
                q11 = Q[0, 0]
            q1 = Q[1:m, 0].copy()
            Q[:m - 1, :m - 1] = Q[1:m, 1:m] - np.outer(q1, q1) / q11
            alpha[:m - 1] = alpha[1:m] - q1 * (alpha[0] / q11)
            centers[:m - 1] = centers[1:m]
            targets[:m - 1] = targets[1:m]
            m -= 1
        if m == 0:
            centers[0] = x_t
            targets[0] = z_t
            Q[0, 0] = 1.0 / (1.0 + ridge)
            alpha[0] = z_t / (1.0 + ridge)
            m = 1
            continue
        k = kvec(x_t)
        b = Q[:m, :m] @ k
        s = (1.0 + ridge) - float(k @ b)
        if not np.isfinite(s) or s <= 1e-12:
            refactor()
            b = Q[:m, :m] @ k
            s = (1.0 + ridge) - float(k @ b)
            if not np.isfinite(s) or s <= 1e-12:
                raise DecompositionError(
                    f"KRLS inverse update broke down at step {t} (schur={s:g})")
        err = z_t - float(k @ alpha[:m])
        Q[:m, :m] += np.outer(b, b) / s
        Q[:m, m] = -b / s
        Q[m, :m] = -b / s
        Q[m, m] = 1.0 / s
        alpha[:m] -= b * (err / s)
        alpha[m] = err / s
        centers[m] = x_t
        targets[m] = z_t
        m += 1

    return KrlsModel(centers=centers[:m].copy(), alpha=alpha[:m].copy(),
                     kinv=Q[:m, :m].copy(), ridge=ridge, sigma=sigma)


def krls_predict(model: KrlsModel, window) -> float:
    window = np.asarray(window, dtype=np.float64)
    if len(model) and window.shape != (model.lags,):
        raise AlignmentError(f"window has shape {window.shape}, expected ({model.lags},)")
    return backend.kernel_sum_eval(model.centers, model.alpha, window, model.sigma)


def krls_predict_batch(model: KrlsModel, windows) -> np.ndarray:
    windows = np.ascontiguousarray(windows, dtype=np.float64)
    return backend.kernel_sum_eval_batch(model.centers, model.alpha, windows,
                                         model.sigma)


def wiener_predict_batch(model: WienerModel, windows) -> np.ndarray:
    windows = np.asarray(windows, dtype=np.float64)
    return windows @ model.weights


def kernel_ridge_batch(dataset: SupervisedDataset, ridge: float, sigma: float):
    """Batch kernel ridge solution (the KRLS equivalence oracle)."""
    X = dataset.inputs
    inv2 = 0.5 / (sigma * sigma)
    d = X[:, None, :] - X[None, :, :]
    K = np.exp(-inv2 * np.einsum("ijk,ijk->ij", d, d))
    alpha = scipy.linalg.solve(K + ridge * np.eye(len(X)), dataset.targets,
                               assume_a="pos")
    return KrlsModel(centers=X, alpha=alpha, kinv=np.zeros((0, 0)),
                     ridge=ridge, sigma=sigma)
