"""Tests for the experiment drivers on small systems."""

import json
from pathlib import Path
from unittest import mock

import numpy as np
import polars as pl
import pytest

from qbm.lab.experiments.models import ExperimentSpec, ParameterError
from qbm.lab.experiments.runner import (
    FitTask,
    align_phase,
    model_tasks,
    run_bell,
    run_chain,
    run_experiment,
    run_fits,
    run_parity,
    run_patterns,
    run_spin_glass,
)
from qbm.lab.learning.data import data_moments, from_table
from qbm.lab.learning.learning import LearnConfig
from qbm.lab.quantum.operators import complete_spec
from qbm.lab.quantum.parse import read_spec


@pytest.fixture
def short_cfg() -> LearnConfig:
    return LearnConfig(max_iters=20)


def read_summary(out: Path) -> dict:
    with open(out / "summary.json", encoding="utf-8") as f:
        return json.load(f)


class TestChain:
    def test_afh(self, tmp_path: Path, short_cfg: LearnConfig):
        outcome = run_chain(ExperimentSpec("afh", n=4), tmp_path, short_cfg)
        assert outcome.exhausted
        for name in (
            "summary.json",
            "wavefunction.csv",
            "qbm_trace.csv",
            "bm_trace.csv",
            "targets.csv",
            "target_spec.txt",
            "qbm_spec.txt",
            "bm_spec.txt",
        ):
            assert (tmp_path / name).exists()
        summary = read_summary(tmp_path)
        assert summary["qbm"]["iters"] == 20
        assert summary["S_eta_rho_qbm"] >= 0
        wavefunction = pl.read_csv(tmp_path / "wavefunction.csv")
        assert wavefunction.columns == ["state", "psi_true", "psi_qbm", "sqrt_p_bm"]
        assert wavefunction.height == 16
        assert np.sum(wavefunction["psi_true"].to_numpy() ** 2) == pytest.approx(1.0)
        assert read_spec(tmp_path / "bm_spec.txt").is_classical

    def test_xyz(self, tmp_path: Path, short_cfg: LearnConfig):
        exp = ExperimentSpec("xyz", n=3, seed=2, params={"field_scale": 0.5})
        run_chain(exp, tmp_path, short_cfg)
        target_spec = read_spec(tmp_path / "target_spec.txt")
        assert sum(t.kind == "field" for t in target_spec.terms) == 9

    def test_align_phase(self):
        reference = np.array([0.6, 0.8])
        psi = np.exp(1j * 0.7) * reference
        np.testing.assert_allclose(align_phase(psi, reference), reference, atol=1e-15)


class TestSpinGlass:
    @pytest.mark.slow
    def test_recovery(self, tmp_path: Path):
        cfg = LearnConfig(tol_dL=0.0, tol_grad=1e-10)
        outcome = run_spin_glass(2, [0.2, 1.0], [0], tmp_path, cfg)
        assert not outcome.exhausted
        frame = pl.read_csv(tmp_path / "spin_glass.csv")
        assert frame.columns == [
            "seed",
            "beta",
            "S",
            "max_coupling_error",
            "final_moment_error",
            "iters",
            "termination",
        ]
        assert frame.height == 2
        assert frame["max_coupling_error"].max() < 1e-6
        assert frame["termination"].to_list() == ["converged", "converged"]
        assert read_summary(tmp_path)["fits"] == 2

    def test_invalid_beta(self, tmp_path: Path, short_cfg: LearnConfig):
        with pytest.raises(ParameterError):
            run_spin_glass(2, [0.5, -1.0], [0], tmp_path, short_cfg)


class TestDatasets:
    def test_parity(self, tmp_path: Path, short_cfg: LearnConfig):
        outcome = run_parity(3, tmp_path, short_cfg)
        table = pl.read_csv(tmp_path / "parity.csv")
        assert table.columns == ["state", "q", "p_bm", "p_qbm"]
        assert table["q"].sum() == pytest.approx(1.0)
        assert table["p_bm"].sum() == pytest.approx(1.0)
        assert table["p_qbm"].sum() == pytest.approx(1.0)
        for key in ("S_eta_rho_qbm", "S_eta_rho_bm", "S_q_p_qbm", "S_q_p_bm"):
            assert outcome.summary[key] >= 0

    def test_patterns(self, tmp_path: Path, short_cfg: LearnConfig):
        outcome = run_patterns(3, 2, tmp_path, short_cfg, n_patterns=2, noise=0.1, seed=5)
        frame = pl.read_csv(tmp_path / "patterns.csv")
        assert frame["seed"].to_list() == [5, 6]
        scatter = pl.read_csv(tmp_path / "patterns_scatter.csv")
        assert scatter.columns == ["instance", "state", "q", "p_bm", "p_qbm"]
        assert scatter.height == 2 * 8
        summary = read_summary(tmp_path)
        assert summary["mean_S_qbm"] == pytest.approx(frame["S_qbm"].mean())
        assert outcome.exhausted

    def test_patterns_share_one_pool(self, tmp_path: Path, short_cfg: LearnConfig):
        with mock.patch("qbm.lab.experiments.runner.run_fits", wraps=run_fits) as mock_fits:
            run_patterns(3, 3, tmp_path / "pooled", short_cfg, n_patterns=2, seed=1, jobs=2)
        mock_fits.assert_called_once()
        tasks, jobs = mock_fits.call_args.args
        assert jobs == 2
        assert [task.mode for task in tasks] == ["qbm", "bm"] * 3
        run_patterns(3, 3, tmp_path / "sequential", short_cfg, n_patterns=2, seed=1)
        pooled = pl.read_csv(tmp_path / "pooled" / "patterns.csv")
        sequential = pl.read_csv(tmp_path / "sequential" / "patterns.csv")
        assert pooled.equals(sequential)

    def test_bell(self, tmp_path: Path):
        outcome = run_bell(tmp_path, points=11)
        assert outcome.summary["max_B"] == pytest.approx(0.5, abs=1e-12)
        location = (outcome.summary["theta"], outcome.summary["phi"])
        assert location in (
            pytest.approx((np.pi / 3, 2 * np.pi / 3)),
            pytest.approx((2 * np.pi / 3, np.pi / 3)),
        )
        assert not outcome.exhausted
        assert (tmp_path / "bell.csv").exists()


class TestFits:
    @pytest.fixture
    def tasks(self):
        spec = complete_spec(2)
        target = data_moments(spec, from_table(2, {0: 0.4, 1: 0.3, 3: 0.3}))
        return model_tasks(spec, target, LearnConfig(max_iters=15))

    def test_model_tasks(self, tasks: list[FitTask]):
        assert [task.mode for task in tasks] == ["qbm", "bm"]
        assert tasks[1].spec.is_classical
        assert len(tasks[1].target) == len(tasks[1].spec)

    def test_pool_matches_sequential(self, tasks: list[FitTask]):
        sequential = run_fits(tasks, jobs=1)
        parallel = run_fits(tasks, jobs=2)
        for a, b in zip(sequential, parallel):
            np.testing.assert_array_equal(a.weights, b.weights)
            assert a.likelihood == b.likelihood

    def test_cache_reuse(self, tmp_path: Path, tasks: list[FitTask]):
        cached = [FitTask(t.mode, t.spec, t.target, t.cfg, tmp_path) for t in tasks]
        first = run_fits(cached)
        with mock.patch("qbm.lab.learning.cache.fit_qbm") as mock_qbm, mock.patch(
            "qbm.lab.learning.cache.fit_bm"
        ) as mock_bm:
            second = run_fits(cached)
            mock_qbm.assert_not_called()
            mock_bm.assert_not_called()
        assert [r.likelihood for r in first] == [r.likelihood for r in second]


def test_run_experiment_dispatch(tmp_path: Path):
    outcome = run_experiment(ExperimentSpec("bell"), tmp_path, LearnConfig(), points=5)
    assert outcome.summary["kind"] == "bell"
