"""Pure-Python (numpy) implementations of the hot kernels.

Mirrors the surface of the compiled fwf._ckernels extension; the
active lane is chosen in fwf.backend. Every function takes float64
arrays and performs Gaussian-kernel work G(a, b) = exp(-(a-b)^2 / 2s^2)
with a fixed, deterministic summation order.
"""

from __future__ import annotations

import numpy as np

_BLOCK = 512  # row-block size for O(n^2) reductions, keeps memory bounded


def _as1d(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def autocorr_sums(x, L, sigma):
    """Per-lag sums S[tau] = sum_{t=tau}^{n-1} G(x[t], x[t-tau])."""
    x = _as1d(x)
    n = x.size
    inv = 0.5 / (sigma * sigma)
    out = np.empty(L)
    for tau in range(L):
        if tau >= n:
            out[tau] = 0.0
            continue
        d = x[tau:] - x[:n - tau]
        out[tau] = np.exp(-inv * d * d).sum()
    return out


def crosscorr_sums(x, z, L, sigma):
    """Per-lag sums S[tau] = sum_{t=tau}^{n-1} G(x[t-tau], z[t])."""
    x = _as1d(x)
    z = _as1d(z)
    n = x.size
    inv = 0.5 / (sigma * sigma)
    out = np.empty(L)
    for tau in range(L):
        if tau >= n:
            out[tau] = 0.0
            continue
        d = x[:n - tau] - z[tau:]
        out[tau] = np.exp(-inv * d * d).sum()
    return out


def mean_kernel_sum(x, sigma):
    """Full double sum sum_t sum_s G(x[t], x[s]) (both orders counted)."""
    x = _as1d(x)
    inv = 0.5 / (sigma * sigma)
    total = 0.0
    for a in range(0, x.size, _BLOCK):
        d = x[a:a + _BLOCK, None] - x[None, :]
        total += float(np.exp(-inv * d * d).sum())
    return total


def local_index_search(windows, targets, w, sigma):
    """Best-partner search for the local-model table.

    For every anchor row i, finds the row m minimizing
    |targets[i] - sum_tau w[tau] * G(windows[i, tau], windows[m, tau])|
    (lowest m on ties). Returns (partners int64[n], zhat float64[n]).
    """
    windows = np.ascontiguousarray(windows, dtype=np.float64)
    targets = _as1d(targets)
    w = _as1d(w)
    n, L = windows.shape
    inv = 0.5 / (sigma * sigma)
    partners = np.empty(n, dtype=np.int64)
    zhat = np.empty(n)
    block = max(1, int(np.ceil(2_000_000 / max(n * L, 1))))
    for a in range(0, n, block):
        b = min(a + block, n)
        d = windows[a:b, None, :] - windows[None, :, :]
        approx = np.exp(-inv * d * d) @ w  # (b-a, n)
        gaps = np.abs(targets[a:b, None] - approx)
        best = gaps.argmin(axis=1)
        partners[a:b] = best
        zhat[a:b] = approx[np.arange(b - a), best]
    return partners, zhat


def weighted_window_eval(center, window, w, sigma):
    """sum_tau w[tau] * G(center[tau], window[tau])."""
    center = _as1d(center)
    window = _as1d(window)
    w = _as1d(w)
    inv = 0.5 / (sigma * sigma)
    d = center - window
    return float(w @ np.exp(-inv * d * d))


def functional_eval(window, w, sigma, y):
    """sum_tau w[tau] * G(window[tau], y) - the RKHS output at point y."""
    window = _as1d(window)
    w = _as1d(w)
    inv = 0.5 / (sigma * sigma)
    d = window - y
    return float(w @ np.exp(-inv * d * d))


def fp_iterate(window, w, sigma, y0, tol, max_iters, denom_floor=1e-12):
    """Weighted-Gaussian fixed-point update from y0.

    Returns (y, iters, converged, degenerate, trajectory) where
    trajectory holds each produced iterate y^(1..iters).
    """
    window = _as1d(window)
    w = _as1d(w)
    inv = 0.5 / (sigma * sigma)
    y = float(y0)
    traj = np.empty(max_iters)
    converged = False
    degenerate = False
    iters = 0
    for i in range(max_iters):
        d = window - y
        g = w * np.exp(-inv * d * d)
        denom = g.sum()
        if abs(denom) < denom_floor:
            degenerate = True
            break
        y_next = float(g @ window) / denom
        traj[iters] = y_next
        iters += 1
        if abs(y_next - y) < tol:
            y = y_next
            converged = True
            break
        y = y_next
    return y, iters, converged, degenerate, traj[:iters]


def kernel_sum_eval(centers, coeffs, window, sigma):
    """sum_i coeffs[i] * G(centers[i], window) with vector-window kernel."""
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    coeffs = _as1d(coeffs)
    if centers.shape[0] == 0:
        return 0.0
    window = _as1d(window)
    inv = 0.5 / (sigma * sigma)
    d = centers - window[None, :]
    return float(coeffs @ np.exp(-inv * (d * d).sum(axis=1)))


def kernel_sum_eval_batch(centers, coeffs, windows, sigma):
    """kernel_sum_eval for every row of ``windows`` at once."""
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    coeffs = _as1d(coeffs)
    windows = np.ascontiguousarray(windows, dtype=np.float64)
    T = windows.shape[0]
    out = np.empty(T)
    if centers.shape[0] == 0:
        out[:] = 0.0
        return out
    inv = 0.5 / (sigma * sigma)
    block = max(1, int(np.ceil(2_000_000 / max(centers.size, 1))))
    for a in range(0, T, block):
        d = windows[a:a + block, None, :] - centers[None, :, :]
        out[a:a + block] = np.exp(-inv * (d * d).sum(axis=2)) @ coeffs
    return out


def klms_train(windows, targets, eta, sigma):
    """Single online KLMS pass; returns the coefficient vector eta*e_i."""
    windows = np.ascontiguousarray(windows, dtype=np.float64)
    targets = _as1d(targets)
    n, _ = windows.shape
    inv = 0.5 / (sigma * sigma)
    coeffs = np.empty(n)
    for t in range(n):
        if t == 0:
            y = 0.0
        else:
            d = windows[:t] - windows[t][None, :]
            y = float(coeffs[:t] @ np.exp(-inv * (d * d).sum(axis=1)))
        coeffs[t] = eta * (targets[t] - y)
    return coeffs
