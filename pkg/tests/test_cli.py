import numpy as np
import pytest

from fwf.cli import main
from fwf.signal import series_from_csv


def run(tmp_path, *args):
    return main(["--out", str(tmp_path), *args])


class TestGenerate:
    def test_writes_series(self, tmp_path):
        assert run(tmp_path, "generate", "--generator", "mg", "--n", "200") == 0
        s = series_from_csv(tmp_path / "series.csv")
        assert len(s) == 200

    def test_seed_changes_noise(self, tmp_path):
        assert main(["--out", str(tmp_path / "a"), "--seed", "1", "generate",
                     "--generator", "mg", "--n", "100", "--noise-std", "0.1"]) == 0
        assert main(["--out", str(tmp_path / "b"), "--seed", "2", "generate",
                     "--generator", "mg", "--n", "100", "--noise-std", "0.1"]) == 0
        a = series_from_csv(tmp_path / "a" / "series.csv")
        b = series_from_csv(tmp_path / "b" / "series.csv")
        assert not np.array_equal(a.samples, b.samples)


class TestFitPredict:
    @pytest.mark.parametrize("spec", ["fwf_lm L=5 sigma=1.5 K=1",
                                      "fwf_fp L=5 sigma=1.5",
                                      "wiener L=5",
                                      "klms L=5 sigma=1",
                                      "krls L=5 sigma=1"])
    def test_all_kinds_round_trip(self, tmp_path, spec):
        assert run(tmp_path, "generate", "--generator", "mg", "--n", "250") == 0
        assert run(tmp_path, "fit", "--series", str(tmp_path / "series.csv"),
                   "--filter", spec) == 0
        kind = spec.split()[0]
        model_path = tmp_path / f"model_{kind}.txt"
        assert model_path.exists()
        assert run(tmp_path, "predict", "--model", str(model_path),
                   "--series", str(tmp_path / "series.csv")) == 0
        lines = (tmp_path / "predictions.csv").read_text().splitlines()
        assert lines[0] == "anchor,prediction,target"
        assert len(lines) > 200

    def test_fp_strategy_flag(self, tmp_path):
        run(tmp_path, "generate", "--generator", "mg", "--n", "250")
        run(tmp_path, "fit", "--series", str(tmp_path / "series.csv"),
            "--filter", "fwf_lm L=5 sigma=1.5 K=1")
        assert run(tmp_path, "predict", "--model",
                   str(tmp_path / "model_fwf_lm.txt"),
                   "--series", str(tmp_path / "series.csv"),
                   "--strategy", "fp") == 0


class TestExitCodes:
    def test_usage_error_is_1(self, tmp_path, capsys):
        assert main(["definitely-not-a-command"]) == 1

    def test_missing_file_is_2(self, tmp_path):
        assert run(tmp_path, "predict", "--model", "nope.model",
                   "--series", "nope.csv") == 2

    def test_data_error_is_2(self, tmp_path):
        (tmp_path / "tiny.csv").write_text("t,value\n0,1\n1,2\n")
        assert run(tmp_path, "fit", "--series", str(tmp_path / "tiny.csv"),
                   "--filter", "wiener L=7") == 2

    def test_numerical_error_is_3(self, tmp_path):
        # constant series: singular normal equations without ridge
        (tmp_path / "const.csv").write_text(
            "t,value\n" + "".join(f"{t},1.0\n" for t in range(50)))
        assert run(tmp_path, "fit", "--series", str(tmp_path / "const.csv"),
                   "--filter", "wiener L=3 ridge=0") == 3

    def test_bad_filter_spec_is_2(self, tmp_path):
        run(tmp_path, "generate", "--generator", "mg", "--n", "100")
        assert run(tmp_path, "fit", "--series", str(tmp_path / "series.csv"),
                   "--filter", "nonsense L=3") == 2


class TestConfigFile:
    def test_cv_from_config(self, tmp_path):
        cfg = tmp_path / "exp.cfg"
        cfg.write_text("generator=mg\nn=500\nfolds=5\nseed=0\n"
                       "filter1=wiener L=7\nfilter2=fwf_lm L=7 sigma=1.5 K=1\n")
        assert main(["--config", str(cfg), "--out", str(tmp_path), "cv"]) == 0
        lines = (tmp_path / "results.csv").read_text().splitlines()
        assert len(lines) == 11  # header + 2 filters x 5 folds
        assert (tmp_path / "timings.csv").exists()


class TestReproducibility:
    def test_cv_rerun_byte_identical(self, tmp_path):
        args = ["cv", "--n", "400", "--noise-std", "0.05",
                "--filter", "fwf_lm L=7 sigma=1.5 K=1", "--filter", "wiener L=7"]
        assert main(["--out", str(tmp_path / "r1"), "--seed", "7", *args]) == 0
        assert main(["--out", str(tmp_path / "r2"), "--seed", "7", *args]) == 0
        a = (tmp_path / "r1" / "results.csv").read_bytes()
        b = (tmp_path / "r2" / "results.csv").read_bytes()
        assert a == b
