import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import fwf
from fwf.errors import (
    DataError,
    DataFormatError,
    InsufficientDataError,
    InvalidFoldError,
)
from fwf.signal import series_from_csv, series_to_csv, train_blocks


class TestMackeyGlass:
    def test_zero_feedback_is_exponential_decay(self):
        # a=0 removes the delay term entirely: dx/dt = -b x
        ts = fwf.generate_mackey_glass(200, a=0.0, b=0.1, tau=30, dt=0.1,
                                       subsample=1, x0=1.0, discard=0)
        t = np.arange(200) * 0.1
        assert np.max(np.abs(ts.samples - np.exp(-0.1 * t))) < 1e-6

    def test_chaotic_regime_bounded_and_nonconstant(self):
        ts = fwf.generate_mackey_glass(2000, a=0.2, b=0.1, tau=30, dt=0.1,
                                       x0=1.2, subsample=6)
        assert np.all(np.isfinite(ts.samples))
        assert ts.samples.max() - ts.samples.min() > 0.1
        assert np.abs(ts.samples).max() < 10

    def test_step_halving_convergence(self):
        # same emission instants: halve dt, double stride and discard
        a = fwf.generate_mackey_glass(100, dt=0.1, subsample=6, discard=200)
        b = fwf.generate_mackey_glass(100, dt=0.05, subsample=12, discard=400)
        assert np.max(np.abs(a.samples - b.samples)) < 1e-4

    def test_divergence_guard(self):
        from fwf.errors import GenerationDivergedError
        with pytest.raises(GenerationDivergedError):
            fwf.generate_mackey_glass(50, a=0.0, b=-400.0, dt=0.5, tau=1.0,
                                      subsample=1, discard=0)

    def test_preconditions(self):
        with pytest.raises(DataError):
            fwf.generate_mackey_glass(0)
        with pytest.raises(DataError):
            fwf.generate_mackey_glass(10, dt=-0.1)
        with pytest.raises(DataError):
            fwf.generate_mackey_glass(10, subsample=0)


class TestLorenz:
    def test_subcritical_rho_decays(self):
        # the origin is stable below rho = 1
        ts = fwf.generate_lorenz_x(1000, rho=0.0, init=(1.0, 1.0, 1.0), discard=500)
        mag = np.abs(ts.samples)
        assert mag[-1] < 1e-3
        assert np.all(np.diff(mag) <= 1e-15)

    def test_classic_parameters_bounded(self):
        ts = fwf.generate_lorenz_x(3000, dt=0.01)
        assert np.all(np.abs(ts.samples) < 25)

    def test_step_halving_convergence(self):
        def halving_diff(dt):
            a = fwf.generate_lorenz_x(100, dt=dt, discard=0)
            b = fwf.generate_lorenz_x(199, dt=dt / 2, discard=0)
            return np.max(np.abs(a.samples - b.samples[::2]))

        d1 = halving_diff(0.005)
        assert d1 < 1e-4
        # fourth-order integrator: halving the step shrinks the halving
        # difference by at least ~2^4
        assert d1 / halving_diff(0.0025) > 12

    def test_sensitive_dependence(self):
        # 1e-8 separation reaches O(1) around step ~3200 of the x track
        a = fwf.generate_lorenz_x(4000, dt=0.01, init=(1.0, 1.0, 1.0), discard=0)
        b = fwf.generate_lorenz_x(4000, dt=0.01, init=(1.0 + 1e-8, 1.0, 1.0),
                                  discard=0)
        assert np.max(np.abs(a.samples - b.samples)) > 1.0


class TestNoise:
    def test_zero_std_identity(self, mg_series):
        out = fwf.add_gaussian_noise(mg_series, 0.0, seed=1)
        assert np.array_equal(out.samples, mg_series.samples)

    def test_empirical_std(self):
        base = fwf.TimeSeries(np.zeros(10000), dt=1.0)
        out = fwf.add_gaussian_noise(base, 0.2, seed=3)
        assert 0.19 <= np.std(out.samples - base.samples) <= 0.21

    def test_seed_determinism(self, mg_series):
        a = fwf.add_gaussian_noise(mg_series, 0.1, seed=9)
        b = fwf.add_gaussian_noise(mg_series, 0.1, seed=9)
        assert np.array_equal(a.samples, b.samples)

    def test_negative_std_rejected(self, mg_series):
        with pytest.raises(DataError):
            fwf.add_gaussian_noise(mg_series, -0.1, seed=0)


class TestTransforms:
    def test_standardize(self, mg_series):
        out = fwf.standardize(mg_series)
        assert abs(out.samples.mean()) < 1e-12
        assert abs(out.samples.std() - 1) < 1e-12

    def test_rescale(self, mg_series):
        out = fwf.rescale(mg_series)
        assert out.samples.min() == 0.0
        assert out.samples.max() == 1.0


class TestEmbed:
    def test_enumerated_example(self):
        ts = fwf.TimeSeries(np.array([1.0, 2.0, 3.0, 4.0]), dt=1.0)
        ds = fwf.embed(ts, 2, 1)
        assert len(ds) == 2
        assert ds.inputs.tolist() == [[2.0, 1.0], [3.0, 2.0]]
        assert ds.targets.tolist() == [3.0, 4.0]

    @pytest.mark.parametrize("n,lags,horizon,count",
                             [(100, 7, 1, 93), (100, 30, 10, 61)])
    def test_count_formula(self, n, lags, horizon, count):
        ts = fwf.TimeSeries(np.arange(n, dtype=float), dt=1.0)
        assert len(fwf.embed(ts, lags, horizon)) == count

    def test_too_short(self):
        ts = fwf.TimeSeries(np.arange(5.0), dt=1.0)
        with pytest.raises(InsufficientDataError):
            fwf.embed(ts, 5, 1)

    @given(n=st.integers(10, 60), lags=st.integers(1, 8),
           horizon=st.integers(0, 3))
    @settings(max_examples=40, deadline=None)
    def test_embedding_reconstructs_series(self, n, lags, horizon):
        if n <= lags + horizon:
            return
        rng = np.random.default_rng(n * 100 + lags * 10 + horizon)
        ts = fwf.TimeSeries(rng.standard_normal(n), dt=1.0)
        ds = fwf.embed(ts, lags, horizon)
        rebuilt = np.concatenate([ds.inputs[0][::-1], ds.inputs[1:, 0]])
        assert np.array_equal(rebuilt, ts.samples[:n - horizon])
        assert np.array_equal(ts.samples[ds.anchors + horizon], ds.targets)


class TestKfold:
    def test_even_blocks(self):
        folds = fwf.kfold_split(10, 5)
        tests = [te for _, te in folds]
        assert all(len(te) == 2 for te in tests)
        assert sorted(np.concatenate(tests).tolist()) == list(range(10))

    def test_remainder_to_earliest(self):
        folds = fwf.kfold_split(11, 2)
        assert [len(te) for _, te in folds] == [6, 5]

    @given(n=st.integers(4, 200), k=st.integers(2, 8))
    @settings(max_examples=50, deadline=None)
    def test_coverage_and_disjointness(self, n, k):
        if k > n:
            return
        folds = fwf.kfold_split(n, k)
        seen = np.concatenate([te for _, te in folds])
        assert sorted(seen.tolist()) == list(range(n))
        for tr, te in folds:
            assert not set(tr) & set(te)
            assert len(tr) + len(te) == n

    def test_invalid(self):
        with pytest.raises(InvalidFoldError):
            fwf.kfold_split(3, 5)
        with pytest.raises(InvalidFoldError):
            fwf.kfold_split(10, 1)

    def test_train_blocks(self):
        tr = np.array([0, 1, 2, 7, 8, 9])
        assert train_blocks(tr) == [(0, 3), (7, 10)]


class TestCsv:
    def test_round_trip_exact(self, mg_series, tmp_path):
        path = tmp_path / "series.csv"
        series_to_csv(mg_series, path)
        back = series_from_csv(path)
        assert np.array_equal(back.samples, mg_series.samples)
        assert back.dt == pytest.approx(mg_series.dt)

    def test_bad_header(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,x\n0,1\n")
        with pytest.raises(DataFormatError):
            series_from_csv(path)
