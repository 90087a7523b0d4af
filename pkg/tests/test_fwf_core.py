import math

import numpy as np
import pytest
import scipy.linalg

import fwf
from fwf.correntropy import KernelConfig, cross_correntropy
from fwf.errors import AlignmentError, DataError, DegenerateMatrixError
from fwf.fwf_core import (
    RESIDUAL_RTOL,
    build_matrix,
    evaluate_functional,
    fit,
    fit_series,
    regularize,
)

CFG = KernelConfig(sigma=1.0)


def random_spd_toeplitz(rng, order, cond_floor=1.0):
    """First row of a random SPD Toeplitz matrix via a circulant spectrum.

    A Toeplitz matrix whose first row is the leading slice of a PSD
    circulant's first row is itself positive semidefinite; a huge random
    spectral dynamic range pushes the condition number up. Retries until
    the sample is SPD with condition above ``cond_floor``.
    """
    while True:
        m = 4 * order
        half = np.exp(rng.uniform(-3, 3, size=m // 2 + 1))
        spectrum = np.concatenate([half, half[-2:0:-1]])  # even symmetry
        first = np.fft.ifft(spectrum).real[:order]
        eigs = scipy.linalg.eigvalsh(scipy.linalg.toeplitz(first))
        if eigs[0] > 1e-10 and eigs[-1] / eigs[0] > cond_floor:
            return first, float(eigs[0]), float(eigs[-1])


class TestBuildMatrix:
    def test_single_entry(self):
        V = build_matrix(np.array([1.0]))
        assert V.dense().tolist() == [[1.0]]

    def test_toeplitz_layout(self):
        V = build_matrix(np.array([1.0, 0.5, 0.2]))
        expect = [[1.0, 0.5, 0.2], [0.5, 1.0, 0.5], [0.2, 0.5, 1.0]]
        assert V.dense().tolist() == expect
        assert V[0, 2] == V[2, 0] == 0.2

    def test_symmetry(self, rng):
        V = build_matrix(rng.standard_normal(6)).dense()
        assert np.array_equal(V, V.T)

    def test_empty_rejected(self):
        with pytest.raises(DataError):
            build_matrix(np.array([]))


class TestRegularize:
    def test_closed_form_example(self):
        # eigenvalues {10, 1}: first row [5.5, 4.5]
        V = build_matrix(np.array([5.5, 4.5]))
        reg = regularize(V, 3.0)
        assert reg.reg.lam == pytest.approx(3.5, abs=1e-12)
        assert reg.reg.achieved_condition == pytest.approx(3.0, rel=1e-12)
        assert reg.first_row[0] == pytest.approx(9.0)

    def test_identity_untouched(self):
        V = build_matrix(np.array([1.0, 0.0, 0.0]))
        reg = regularize(V, 30.0)
        assert reg.reg.lam == 0.0
        assert np.array_equal(reg.first_row, V.first_row)

    def test_already_below_target(self):
        V = build_matrix(np.array([3.0, 1.0]))  # eigenvalues {4, 2}, cond 2
        reg = regularize(V, 30.0)
        assert reg.reg.lam == 0.0
        assert reg.reg.achieved_condition == pytest.approx(2.0)

    def test_exactness_on_random_instances(self, rng):
        for _ in range(20):
            order = int(rng.integers(3, 33))
            first, e_min, e_max = random_spd_toeplitz(rng, order, cond_floor=30)
            reg = regularize(build_matrix(first), 30.0)
            eigs = scipy.linalg.eigvalsh(reg.dense())
            assert eigs[-1] / eigs[0] == pytest.approx(30.0, rel=1e-6)

    def test_monotone_conditioning(self, rng):
        first, e_min, e_max = random_spd_toeplitz(rng, 12, cond_floor=5)
        conds = []
        for lam in np.linspace(0, e_max, 12):
            eigs = scipy.linalg.eigvalsh(
                scipy.linalg.toeplitz(first) + lam * np.eye(12))
            conds.append(eigs[-1] / eigs[0])
        assert np.all(np.diff(conds) <= 1e-9)

    def test_gamma_records_ratio(self):
        V = build_matrix(np.array([5.5, 4.5]))
        reg = regularize(V, 3.0)
        assert reg.reg.gamma == pytest.approx(3.5 / 1.0, rel=1e-9)

    def test_degenerate_matrix(self):
        with pytest.raises(DegenerateMatrixError):
            regularize(build_matrix(np.array([-1.0, 0.0])), 30.0)

    def test_bad_target(self):
        with pytest.raises(DataError):
            regularize(build_matrix(np.array([1.0])), 1.0)


class TestFit:
    def test_identity_system_returns_rho(self, rng):
        # tiny sigma on non-repeating data: V == I, so w* == rho
        x = np.arange(40.0)
        z = x + 0.5
        cfg = KernelConfig(sigma=1e-3)
        model = fit(x, z, 4, cfg, target_condition=30.0)
        rho = cross_correntropy(x, z, 4, cfg)
        assert np.max(np.abs(model.weights - rho.values)) < 1e-10

    def test_constant_series_symmetric_weights(self):
        x = np.full(30, 1.0)
        model = fit(x, x, 5, CFG, target_condition=30.0)
        assert np.max(np.abs(model.weights - model.weights[0])) < 1e-10

    def test_residual_contract_on_mg(self, mg_series):
        model = fit_series(mg_series, 7, KernelConfig(sigma=1.5),
                           target_condition=30.0)
        V = scipy.linalg.toeplitz(np.concatenate(
            ([model.v.values[0] + model.reg.lam], model.v.values[1:])))
        resid = np.max(np.abs(V @ model.weights - model.rho.values))
        assert resid <= RESIDUAL_RTOL * np.max(np.abs(model.rho.values))

    def test_deterministic(self, mg_series):
        a = fit_series(mg_series, 7, KernelConfig(sigma=1.5))
        b = fit_series(mg_series, 7, KernelConfig(sigma=1.5))
        assert np.array_equal(a.weights, b.weights)

    def test_centered_fit_solves_centered_system(self, mg_series):
        model = fit_series(mg_series, 5, KernelConfig(sigma=1.5), centered=True)
        assert model.centered and model.v.centered
        assert np.all(np.isfinite(model.weights))

    def test_chunked_equals_single_when_contiguous(self, mg_series):
        x = mg_series.samples[:-1]
        z = mg_series.samples[1:]
        whole = fit(x, z, 5, CFG)
        split_fit = fit([x], [z], 5, CFG)
        assert np.array_equal(whole.weights, split_fit.weights)

    def test_too_short(self):
        with pytest.raises(DataError):
            fit_series(fwf.TimeSeries(np.arange(6.0), dt=1.0), 5, CFG)


class TestEvaluateFunctional:
    def test_single_lag_peak(self):
        model = _toy_model(weights=[1.0], sigma=1.0)
        assert evaluate_functional(model, [2.0], 2.0) == pytest.approx(1.0)

    def test_gaussian_decay_far_away(self):
        model = _toy_model(weights=[1.0, 0.5], sigma=1.0)
        assert evaluate_functional(model, [0.0, 1.0], 1e3) < 1e-300

    def test_hand_value(self):
        model = _toy_model(weights=[0.5, 0.5], sigma=1.0)
        got = evaluate_functional(model, [0.0, 2.0], 1.0)
        assert got == pytest.approx(math.exp(-0.5), abs=1e-12)

    def test_dimension_mismatch(self):
        model = _toy_model(weights=[0.5, 0.5], sigma=1.0)
        with pytest.raises(AlignmentError):
            evaluate_functional(model, [1.0, 2.0, 3.0], 0.0)


def _toy_model(weights, sigma):
    from fwf.correntropy import CorrentropyVector, CrossCorrentropyVector
    from fwf.fwf_core import FwfModel, RegularizationRecord
    w = np.asarray(weights, dtype=np.float64)
    L = len(w)
    rec = RegularizationRecord(lam=0.0, gamma=0.0, target_condition=30.0,
                               achieved_condition=1.0, eig_min=1.0, eig_max=1.0)
    return FwfModel(
        weights=w, sigma=sigma, lags=L, horizon=1, reg=rec,
        rho=CrossCorrentropyVector(values=w.copy(), sigma=sigma),
        v=CorrentropyVector(values=np.eye(1, L, 0)[0], sigma=sigma,
                            n_effective=np.ones(L, dtype=np.int64)))


class TestToeplitzSolveEquivalence:
    def test_dense_vs_toeplitz_solver(self, rng):
        for _ in range(10):
            order = int(rng.integers(2, 65))
            first, _, _ = random_spd_toeplitz(rng, order)
            rhs = rng.standard_normal(order)
            dense = scipy.linalg.solve(scipy.linalg.toeplitz(first), rhs,
                                       assume_a="pos")
            levinson = scipy.linalg.solve_toeplitz(first, rhs)
            assert np.max(np.abs(dense - levinson)) < 1e-10 * max(
                1.0, np.max(np.abs(dense)))
