"""Gaussian-kernel correntropy statistics.

Lagged autocorrentropy v(tau) = E[G(x(t), x(t-tau))] and the
input/target cross statistic rho_z(tau) = E[G(x(t-tau), z(t))] are
estimated over valid pairs only, each lag normalized by its own pair
count, so no out-of-range index ever enters a sum and v(0) == 1
exactly for the unnormalized kernel.

The kernel is unnormalized (peak 1) by default, which is the filtering
convention; the 1/(sqrt(2*pi)*sigma) density scaling is available via
KernelConfig(normalized=True) and is what makes small-sigma
correntropy comparable to the empirical bisector density.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from . import backend
from .errors import AlignmentError, DataError, InconsistentConfigError, InsufficientDataError
from .signal import TimeSeries


@dataclass(frozen=True)
class KernelConfig:
    """Gaussian kernel G(a, b) = exp(-|a-b|^2 / 2 sigma^2).

    sigma is the bandwidth (same units as the signal amplitude);
    normalized=True multiplies by 1/(sqrt(2 pi) sigma).
    """

    sigma: float
    normalized: bool = False

    def __post_init__(self):
        if not (self.sigma > 0):
            raise DataError("kernel sigma must be positive")

    @property
    def scale(self) -> float:
        return 1.0 / (math.sqrt(2.0 * math.pi) * self.sigma) if self.normalized else 1.0


@dataclass(frozen=True)
class CorrentropyVector:
    """Per-lag autocorrentropy values v_0 .. v_{L-1}."""

    values: np.ndarray
    sigma: float
    n_effective: np.ndarray  # valid pair count per lag
    centered: bool = False
    normalized: bool = False

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class CrossCorrentropyVector:
    """Per-lag input/target cross-correntropy rho_z(0) .. rho_z(L-1)."""

    values: np.ndarray
    sigma: float
    normalized: bool = False

    def __len__(self):
        return len(self.values)


def _samples(series) -> np.ndarray:
    if isinstance(series, TimeSeries):
        return series.samples
    return np.ascontiguousarray(series, dtype=np.float64)


def gaussian(a, b, config: KernelConfig) -> float:
    """Gaussian kernel of two points (scalars or equal-length vectors)."""
    a = np.atleast_1d(np.asarray(a, dtype=np.float64))
    b = np.atleast_1d(np.asarray(b, dtype=np.float64))
    if a.shape != b.shape:
        raise AlignmentError("kernel arguments must have the same shape")
    d = a - b
    sq = float(d @ d)
    return config.scale * math.exp(-sq / (2.0 * config.sigma ** 2))


def _chunk_list(series):
    if isinstance(series, (list, tuple)):
        return [_samples(c) for c in series]
    return [_samples(series)]


def autocorrentropy(series, lags: int, config: KernelConfig) -> CorrentropyVector:
    """Lagged autocorrentropy of a series (or list of disjoint chunks).

    v(tau) is the mean kernel over all in-range pairs (t, t-tau); with a
    chunk list the pairs of every chunk are pooled before dividing, so a
    fold split into two contiguous runs never pairs samples across the
    gap.
    """
    chunks = _chunk_list(series)
    if lags < 1:
        raise DataError("lags must be >= 1")
    sums = np.zeros(lags)
    counts = np.zeros(lags, dtype=np.int64)
    for x in chunks:
        sums += backend.autocorr_sums(x, lags, config.sigma)
        counts += np.maximum(x.size - np.arange(lags), 0)
    if counts[lags - 1] < 1:
        n = sum(x.size for x in chunks)
        raise InsufficientDataError(
            f"no valid pairs at lag {lags - 1} (total length {n})")
    values = config.scale * sums / counts
    return CorrentropyVector(values=values, sigma=config.sigma,
                             n_effective=counts, normalized=config.normalized)


def cross_correntropy(inputs, targets, lags: int, config: KernelConfig) -> CrossCorrentropyVector:
    """Cross-correntropy rho_z(tau) between lagged inputs and aligned targets.

    ``inputs`` and ``targets`` must be aligned sample-for-sample (or be
    equal-length lists of aligned chunks); rho_z(tau) averages
    G(x(t-tau), z(t)) over the valid range, same pair convention as
    :func:`autocorrentropy`.
    """
    x_chunks = _chunk_list(inputs)
    z_chunks = _chunk_list(targets)
    if len(x_chunks) != len(z_chunks):
        raise AlignmentError("inputs and targets must have the same chunk structure")
    if lags < 1:
        raise DataError("lags must be >= 1")
    sums = np.zeros(lags)
    counts = np.zeros(lags, dtype=np.int64)
    for x, z in zip(x_chunks, z_chunks):
        if x.size != z.size:
            raise AlignmentError(
                f"aligned chunks differ in length ({x.size} vs {z.size})")
        sums += backend.crosscorr_sums(x, z, lags, config.sigma)
        counts += np.maximum(x.size - np.arange(lags), 0)
    if counts[lags - 1] < 1:
        raise InsufficientDataError(f"no valid pairs at lag {lags - 1}")
    values = config.scale * sums / counts
    return CrossCorrentropyVector(values=values, sigma=config.sigma,
                                  normalized=config.normalized)


def mean_kernel(series, config: KernelConfig) -> float:
    """All-pairs kernel mean (1/N^2) sum_t sum_s G(x(t), x(s))."""
    chunks = _chunk_list(series)
    total = 0.0
    n = 0
    for x in chunks:
        n += x.size
    # pooled centering couples samples across chunks by design: the mean
    # term estimates E[G] over the marginal, which is chunk-agnostic
    pooled = np.concatenate(chunks) if len(chunks) > 1 else chunks[0]
    total = backend.mean_kernel_sum(pooled, config.sigma)
    return config.scale * total / (n * n)


def center_correntropy(v: CorrentropyVector, series, config: KernelConfig) -> CorrentropyVector:
    """Subtract the RKHS mean term from every lag of ``v``."""
    if config.sigma != v.sigma or config.normalized != v.normalized:
        raise InconsistentConfigError(
            "centering config does not match the vector's kernel config")
    if v.centered:
        return v
    m = mean_kernel(series, config)
    return replace(v, values=v.values - m, centered=True)


def density_along_bisector(pairs, epsilon: float) -> float:
    """Empirical density P(|x_a - x_b| < eps) / (2 eps) from sample pairs.

    The small-sigma oracle for correntropy: a normalized-kernel
    correntropy estimate with eps ~ 1.25 sigma should approach this
    count-based value.
    """
    if epsilon <= 0:
        raise DataError("epsilon must be positive")
    arr = np.asarray(pairs, dtype=np.float64)
    if arr.size == 0:
        raise InsufficientDataError("no pairs supplied")
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise DataError("pairs must be an (n, 2) array-like")
    frac = float(np.mean(np.abs(arr[:, 0] - arr[:, 1]) < epsilon))
    return frac / (2.0 * epsilon)
