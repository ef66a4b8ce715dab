"""Tests for the qbm-lab command line."""

import json
import logging
from pathlib import Path
from unittest import mock

import numpy as np
import pytest

from qbm.lab.cli.cli import EXIT_ERROR, EXIT_MAX_ITERS, EXIT_OK, build_parser, main
from qbm.lab.learning.parse import read_moments, write_moments
from qbm.lab.quantum.density import MomentVector
from qbm.lab.quantum.operators import complete_spec
from qbm.lab.quantum.parse import read_spec, write_spec


def read_summary(fp: Path) -> dict:
    with open(fp, encoding="utf-8") as f:
        return dict(line.strip().split("=", 1) for line in f if line.strip())


@pytest.fixture
def uniform_samples(tmp_path: Path) -> Path:
    fp = tmp_path / "uniform.txt"
    fp.write_text("+1 +1\n-1 +1\n+1 -1\n-1 -1\n")
    return fp


@pytest.fixture
def model(tmp_path: Path) -> Path:
    fp = tmp_path / "model.txt"
    write_spec(complete_spec(2), fp)
    return fp


@pytest.fixture
def singlet_target(tmp_path: Path) -> Path:
    spec = complete_spec(2)
    values = np.zeros(len(spec))
    for k in "xyz":
        values[spec.index(("coupling", (0, 1), k))] = -1.0
    fp = tmp_path / "singlet.csv"
    write_moments(spec, MomentVector(tuple(spec.keys), values), fp, entropy=0.0)
    return fp


class TestStats:
    def test_uniform(self, tmp_path: Path, uniform_samples: Path):
        out = tmp_path / "stats"
        assert main(["stats", str(uniform_samples), "--out", str(out)]) == EXIT_OK
        values, entropy = read_moments(out / "stats.csv", complete_spec(2))
        assert entropy == 0.0
        assert values[("field", (0,), "x")] == pytest.approx(1.0)
        assert values[("coupling", (0, 1), "z")] == pytest.approx(0.0)
        assert (out / "entanglement.csv").exists()
        with open(out / "manifest.json", encoding="utf-8") as f:
            manifest = json.load(f)
        assert manifest["command"] == "stats"
        assert manifest["outputs"] == sorted(manifest["outputs"])

    def test_correlated_distribution(self, tmp_path: Path):
        data = tmp_path / "pair.txt"
        data.write_text("+1 +1 0.5\n-1 -1 0.5\n")
        out = tmp_path / "stats"
        assert main(["stats", str(data), "--distribution", "--out", str(out)]) == EXIT_OK
        values, _ = read_moments(out / "stats.csv", complete_spec(2))
        assert values[("coupling", (0, 1), "y")] == pytest.approx(-1.0)

    def test_zero_one(self, tmp_path: Path):
        data = tmp_path / "bits.txt"
        data.write_text("1 1\n0 0\n")
        out = tmp_path / "stats"
        assert main(["stats", str(data), "--zero-one", "--out", str(out)]) == EXIT_OK

    def test_deterministic(self, tmp_path: Path, uniform_samples: Path):
        main(["stats", str(uniform_samples), "--out", str(tmp_path / "a")])
        main(["stats", str(uniform_samples), "--out", str(tmp_path / "b")])
        for name in ("stats.csv", "entanglement.csv"):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_malformed_samples(self, tmp_path: Path, caplog):
        data = tmp_path / "bad.txt"
        data.write_text("+1 +1\n+1 2\n")
        with caplog.at_level(logging.ERROR):
            assert main(["stats", str(data), "--out", str(tmp_path / "out")]) == EXIT_ERROR
        assert "bad.txt:2:" in caplog.text


class TestLearn:
    def test_weight_cap(self, tmp_path: Path, model: Path, singlet_target: Path):
        out = tmp_path / "run"
        code = main(["learn", str(model), "--target", str(singlet_target), "--weight-cap", "1.5", "--out", str(out)])
        assert code == EXIT_OK
        summary = read_summary(out / "summary.txt")
        assert summary["termination"] == "weight_cap"
        assert summary["non_unique"] == "True"
        assert float(summary["S_eta_rho"]) >= 0
        learned = read_spec(out / "learned_spec.txt")
        assert learned.keys == complete_spec(2).keys
        for name in ("trace.csv", "manifest.json"):
            assert (out / name).exists()

    def test_iteration_budget(self, tmp_path: Path, model: Path, uniform_samples: Path):
        out = tmp_path / "run"
        code = main(["learn", str(model), "--samples", str(uniform_samples), "--max-iter", "3", "--out", str(out)])
        assert code == EXIT_MAX_ITERS
        summary = read_summary(out / "summary.txt")
        assert summary["termination"] == "max_iters"
        assert summary["iters"] == "3"

    def test_cache_dir(self, tmp_path: Path, model: Path, uniform_samples: Path):
        args = ["learn", str(model), "--samples", str(uniform_samples), "--max-iter", "3"]
        args += ["--cache-dir", str(tmp_path / "cache")]
        assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_MAX_ITERS
        with mock.patch("qbm.lab.learning.cache.fit_qbm") as mock_fit:
            assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_MAX_ITERS
            mock_fit.assert_not_called()
        assert read_summary(tmp_path / "a" / "summary.txt") == read_summary(tmp_path / "b" / "summary.txt")

    def test_bm_on_quantum_spec(self, tmp_path: Path, model: Path, uniform_samples: Path, caplog):
        with caplog.at_level(logging.ERROR):
            code = main(["learn", str(model), "--samples", str(uniform_samples), "--mode", "bm"])
        assert code == EXIT_ERROR
        assert "z-axis" in caplog.text

    def test_bm_on_classical_spec(self, tmp_path: Path, uniform_samples: Path):
        spec_file = tmp_path / "ising.txt"
        spec_file.write_text("field 0 z 0\nfield 1 z 0\ncoupling 0 1 z 0\n")
        out = tmp_path / "run"
        args = ["learn", str(spec_file), "--samples", str(uniform_samples), "--mode", "bm", "--out", str(out)]
        assert main(args + ["--tol-grad", "1e-12"]) == EXIT_OK
        learned = read_spec(out / "learned_spec.txt")
        np.testing.assert_allclose(learned.weights, 0.0, atol=1e-12)

    def test_malformed_spec(self, tmp_path: Path, uniform_samples: Path, caplog):
        spec_file = tmp_path / "model.txt"
        spec_file.write_text("spins 2\nfield 0 q 1.0\n")
        with caplog.at_level(logging.ERROR):
            code = main(["learn", str(spec_file), "--samples", str(uniform_samples)])
        assert code == EXIT_ERROR
        assert "model.txt:2:" in caplog.text

    def test_spin_mismatch(self, tmp_path: Path, uniform_samples: Path):
        spec_file = tmp_path / "model.txt"
        write_spec(complete_spec(3), spec_file)
        assert main(["learn", str(spec_file), "--samples", str(uniform_samples)]) == EXIT_ERROR

    def test_missing_data_source(self, model: Path):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["learn", str(model)])


class TestExperiment:
    def test_bell(self, tmp_path: Path):
        out = tmp_path / "bell"
        assert main(["experiment", "bell", "--points", "11", "--out", str(out)]) == EXIT_OK
        with open(out / "summary.json", encoding="utf-8") as f:
            assert json.load(f)["max_B"] == pytest.approx(0.5, abs=1e-12)
        with open(out / "manifest.json", encoding="utf-8") as f:
            manifest = json.load(f)
        assert manifest["command"] == "experiment bell"
        assert manifest["parameters"]["points"] == 11

    def test_spin_glass_budget(self, tmp_path: Path):
        out = tmp_path / "sg"
        args = ["experiment", "spin-glass", "--n", "2", "--beta-list", "0.2", "--max-iter", "10", "--out", str(out)]
        assert main(args) == EXIT_MAX_ITERS
        assert (out / "spin_glass.csv").exists()

    def test_bad_couplings(self, tmp_path: Path, caplog):
        with caplog.at_level(logging.ERROR):
            code = main(["experiment", "xyz", "--n", "3", "--couplings=-1,-1", "--out", str(tmp_path)])
        assert code == EXIT_ERROR
        assert "--couplings" in caplog.text

    def test_bad_jobs(self, tmp_path: Path):
        assert main(["experiment", "parity", "--n", "3", "--jobs", "0", "--out", str(tmp_path)]) == EXIT_ERROR

    def test_kind_choices(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args(["experiment", "spin_glass"])
