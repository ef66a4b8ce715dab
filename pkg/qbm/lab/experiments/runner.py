"""Experiment drivers: build a target, fit the QBM and the BM, write plot-ready outputs.

Every driver writes CSV files and a `summary.json` into its output directory and
returns a `RunOutcome`. Independent fits run in a process pool when `jobs > 1`.
"""

from __future__ import annotations

import json
import logging
import warnings
from dataclasses import dataclass, field
from multiprocessing import Pool
from pathlib import Path
from typing import Sequence

import numpy as np
import polars as pl

from qbm.lab.learning.cache import FitCache
from qbm.lab.learning.data import EmpiricalDistribution, data_density, data_moments
from qbm.lab.learning.learning import LearnConfig, LearnResult, Termination, fit_bm, fit_qbm, relative_entropy
from qbm.lab.learning.parse import write_moments
from qbm.lab.quantum.density import MomentVector, kl_divergence, moments, von_neumann_entropy
from qbm.lab.quantum.matrices import DensityMatrix
from qbm.lab.quantum.operators import (
    DegenerateStateWarning,
    HamiltonianSpec,
    build_hamiltonian,
    complete_spec,
    ground_state,
)
from qbm.lab.quantum.parse import write_spec
from qbm.lab.quantum.spin_basis import SpinConfig

from .models import (
    XYZ_COUPLINGS,
    ExperimentSpec,
    afh_chain,
    bell_grid,
    bell_scan,
    parity_distribution,
    pattern_mixture,
    spin_glass,
    xyz_chain,
)

log = logging.getLogger(__name__)

DEFAULT_BETAS = (0.2, 0.5, 1.0, 2.0, 4.0)


@dataclass
class RunOutcome:
    summary: dict
    outputs: list[Path] = field(default_factory=list)
    exhausted: bool = False


@dataclass(frozen=True)
class FitTask:
    mode: str
    spec: HamiltonianSpec
    target: np.ndarray
    cfg: LearnConfig
    cache_dir: Path | None = None


def run_fit(task: FitTask) -> LearnResult:
    if task.cache_dir is not None:
        return FitCache(task.cache_dir).fit(task.mode, task.spec, task.target, task.cfg)
    fit = fit_qbm if task.mode == "qbm" else fit_bm
    return fit(task.spec, task.target, task.cfg)


def run_fits(tasks: Sequence[FitTask], jobs: int = 1) -> list[LearnResult]:
    """Run independent fits, in a process pool when `jobs > 1`; results keep task order."""
    if jobs > 1 and len(tasks) > 1:
        with Pool(min(jobs, len(tasks))) as pool:
            return pool.map(run_fit, tasks)
    return [run_fit(task) for task in tasks]


def model_tasks(
    spec: HamiltonianSpec, target: MomentVector, cfg: LearnConfig, cache_dir: Path | None = None
) -> list[FitTask]:
    """QBM task on the full spec and BM task on its z-axis terms."""
    bm_spec = spec.restrict("z")
    return [
        FitTask("qbm", spec, target.align(spec), cfg, cache_dir),
        FitTask("bm", bm_spec, target.align(bm_spec), cfg, cache_dir),
    ]


def top_state(result: LearnResult) -> np.ndarray:
    """Largest eigenvector of the learned Hamiltonian."""
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", DegenerateStateWarning)
        return ground_state(result.hamiltonian)


def align_phase(psi: np.ndarray, reference: np.ndarray) -> np.ndarray:
    """Multiply `psi` by the global phase that makes its overlap with `reference` real positive."""
    overlap = np.vdot(psi, reference)
    if abs(overlap) == 0:
        return psi
    return psi * (overlap / abs(overlap))


def _write_json(data: dict, fp: Path) -> Path:
    with open(fp, "w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, sort_keys=True)
    return fp


def _write_csv(frame: pl.DataFrame, fp: Path) -> Path:
    frame.write_csv(fp)
    return fp


def _labels(n: int) -> list[str]:
    return [SpinConfig(n, s).label for s in range(2**n)]


def _exhausted(*results: LearnResult) -> bool:
    return any(result.termination == Termination.MAX_ITERS for result in results)


def run_chain(
    exp: ExperimentSpec, out: Path, cfg: LearnConfig, jobs: int = 1, cache_dir: Path | None = None
) -> RunOutcome:
    """Learn the ground state of an afh or xyz chain with the QBM and the BM.

    Outputs: summary.json, wavefunction.csv (state, psi_true, psi_qbm, sqrt_p_bm),
    targets.csv, target_spec.txt, qbm_spec.txt, bm_spec.txt, qbm_trace.csv and
    bm_trace.csv.
    """
    exp.validate()
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    n = exp.n
    if exp.kind == "afh":
        target_spec = afh_chain(n)
    else:
        wx, wy, wz = exp.params.get("couplings", XYZ_COUPLINGS)
        target_spec = xyz_chain(n, wx, wy, wz, field_seed=exp.seed, field_scale=exp.params.get("field_scale", 1.0))

    psi = ground_state(build_hamiltonian(target_spec))
    eta = DensityMatrix.from_state(psi)
    eta_entropy = von_neumann_entropy(eta)
    spec = complete_spec(n)
    target = moments(spec, eta)
    qbm, bm = run_fits(model_tasks(spec, target, cfg, cache_dir), jobs)

    psi_qbm = align_phase(top_state(qbm), psi)
    sqrt_p_bm = np.sqrt(bm.probabilities)
    summary = {
        "kind": exp.kind,
        "n": n,
        "seed": exp.seed,
        "S_eta_rho_qbm": relative_entropy(qbm.likelihood, eta_entropy),
        "S_eta_rho_bm": relative_entropy(bm.likelihood, eta_entropy),
        "max_abs_psi_error_bm": float(np.max(np.abs(sqrt_p_bm - np.abs(psi)))),
        "qbm": qbm.summary(),
        "bm": bm.summary(),
    }
    msg = (
        f"{exp.kind} n={n}: S(eta, rho_qbm)={summary['S_eta_rho_qbm']:.3g} "
        f"S(eta, rho_bm)={summary['S_eta_rho_bm']:.3g}"
    )
    log.info(msg)

    wavefunction = pl.DataFrame(
        {"state": _labels(n), "psi_true": psi.real, "psi_qbm": psi_qbm.real, "sqrt_p_bm": sqrt_p_bm}
    )
    outputs = [
        _write_json(summary, out / "summary.json"),
        _write_csv(wavefunction, out / "wavefunction.csv"),
        _write_csv(qbm.trace, out / "qbm_trace.csv"),
        _write_csv(bm.trace, out / "bm_trace.csv"),
    ]
    write_moments(spec, target, out / "targets.csv", entropy=eta_entropy)
    write_spec(target_spec, out / "target_spec.txt")
    write_spec(qbm.spec, out / "qbm_spec.txt")
    write_spec(bm.spec, out / "bm_spec.txt")
    outputs += [out / name for name in ("targets.csv", "target_spec.txt", "qbm_spec.txt", "bm_spec.txt")]
    return RunOutcome(summary, outputs, _exhausted(qbm, bm))


def run_spin_glass(
    n: int,
    betas: Sequence[float],
    seeds: Sequence[int],
    out: Path,
    cfg: LearnConfig,
    jobs: int = 1,
    cache_dir: Path | None = None,
) -> RunOutcome:
    """Recover random spin glasses at every (seed, β) and record the errors.

    Outputs spin_glass.csv with columns seed, beta, S, max_coupling_error,
    final_moment_error, iters, termination.
    """
    for beta in betas:
        ExperimentSpec("spin_glass", n=n, beta=beta).validate()
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    instances, tasks = [], []
    for seed in seeds:
        for beta in betas:
            spec, eta = spin_glass(n, beta, seed)
            target = moments(spec, eta)
            instances.append((seed, beta, spec, von_neumann_entropy(eta)))
            tasks.append(FitTask("qbm", spec, target.values, cfg, cache_dir))
    results = run_fits(tasks, jobs)

    rows = []
    for (seed, beta, spec, entropy), result in zip(instances, results):
        rows.append(
            {
                "seed": seed,
                "beta": beta,
                "S": relative_entropy(result.likelihood, entropy),
                "max_coupling_error": float(np.max(np.abs(result.weights - beta * spec.weights))),
                "final_moment_error": result.final_moment_error,
                "iters": result.iterations,
                "termination": result.termination.value,
            }
        )
        msg = f"spin glass seed={seed} beta={beta}: {rows[-1]['termination']} after {result.iterations} iterations"
        log.info(msg)
    frame = pl.DataFrame(rows)
    summary = {"kind": "spin_glass", "n": n, "betas": list(betas), "seeds": list(seeds), "fits": len(rows)}
    outputs = [_write_csv(frame, out / "spin_glass.csv"), _write_json(summary, out / "summary.json")]
    return RunOutcome(summary, outputs, _exhausted(*results))


def data_tasks(q: EmpiricalDistribution, cfg: LearnConfig, cache_dir: Path | None = None) -> list[FitTask]:
    """QBM and BM tasks on the complete spec for the data density matrix of `q`."""
    spec = complete_spec(q.n)
    return model_tasks(spec, data_moments(spec, q), cfg, cache_dir)


def compare_fits(q: EmpiricalDistribution, qbm: LearnResult, bm: LearnResult) -> tuple[dict, pl.DataFrame]:
    """Cross entropies S(η, ρ) and S(q, p) of both models and the per-state table.

    The table has columns state, q, p_bm, p_qbm with p_qbm = |⟨s|ψ⟩|² of the largest
    eigenvector of ρ_qbm.
    """
    eta_entropy = von_neumann_entropy(data_density(q))
    p_qbm = np.abs(top_state(qbm)) ** 2
    p_bm = bm.probabilities
    dense_q = q.dense()
    entropies = {
        "S_eta_rho_qbm": relative_entropy(qbm.likelihood, eta_entropy),
        "S_eta_rho_bm": relative_entropy(bm.likelihood, eta_entropy),
        "S_q_p_qbm": kl_divergence(dense_q, p_qbm),
        "S_q_p_bm": kl_divergence(dense_q, p_bm),
        "qbm": qbm.summary(),
        "bm": bm.summary(),
    }
    table = pl.DataFrame({"state": _labels(q.n), "q": dense_q, "p_bm": p_bm, "p_qbm": p_qbm})
    return entropies, table


def compare_on_data(
    q: EmpiricalDistribution, cfg: LearnConfig, jobs: int = 1, cache_dir: Path | None = None
) -> tuple[dict, pl.DataFrame, bool]:
    """Fit the QBM and the BM on the data density matrix of `q`.

    Returns the `compare_fits` entropies and table, and whether any fit exhausted its
    iteration budget.
    """
    qbm, bm = run_fits(data_tasks(q, cfg, cache_dir), jobs)
    entropies, table = compare_fits(q, qbm, bm)
    return entropies, table, _exhausted(qbm, bm)


def run_parity(n: int, out: Path, cfg: LearnConfig, jobs: int = 1, cache_dir: Path | None = None) -> RunOutcome:
    """QBM and BM on the parity dataset; outputs parity.csv and summary.json."""
    ExperimentSpec("parity", n=n).validate()
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    entropies, table, exhausted = compare_on_data(parity_distribution(n), cfg, jobs, cache_dir)
    summary = {"kind": "parity", "n": n, **entropies}
    msg = f"parity n={n}: S(q, p_qbm)={entropies['S_q_p_qbm']:.3g} S(q, p_bm)={entropies['S_q_p_bm']:.3g}"
    log.info(msg)
    outputs = [_write_csv(table, out / "parity.csv"), _write_json(summary, out / "summary.json")]
    return RunOutcome(summary, outputs, exhausted)


def run_patterns(
    n: int,
    instances: int,
    out: Path,
    cfg: LearnConfig,
    n_patterns: int = 8,
    noise: float = 0.1,
    seed: int = 0,
    jobs: int = 1,
    cache_dir: Path | None = None,
) -> RunOutcome:
    """QBM and BM on `instances` random pattern mixtures, instance i drawn with seed + i.

    Outputs patterns.csv (instance, seed, S_qbm, S_bm), patterns_scatter.csv (instance,
    state, q, p_bm, p_qbm) and summary.json with the means and standard deviations.
    """
    ExperimentSpec("patterns", n=n, seed=seed, params={"n_patterns": n_patterns, "noise": noise}).validate()
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    mixtures = [pattern_mixture(n, n_patterns, noise, seed + instance) for instance in range(instances)]
    tasks = [task for q in mixtures for task in data_tasks(q, cfg, cache_dir)]
    results = run_fits(tasks, jobs)

    rows, scatter = [], []
    for instance, q in enumerate(mixtures):
        qbm, bm = results[2 * instance], results[2 * instance + 1]
        entropies, table = compare_fits(q, qbm, bm)
        rows.append(
            {
                "instance": instance,
                "seed": seed + instance,
                "S_qbm": entropies["S_eta_rho_qbm"],
                "S_bm": entropies["S_eta_rho_bm"],
            }
        )
        scatter.append(table.select(pl.lit(instance).alias("instance"), pl.all()))
        msg = f"patterns instance {instance}: S_qbm={rows[-1]['S_qbm']:.3g} S_bm={rows[-1]['S_bm']:.3g}"
        log.info(msg)
    frame = pl.DataFrame(rows)
    summary = {
        "kind": "patterns",
        "n": n,
        "instances": instances,
        "n_patterns": n_patterns,
        "noise": noise,
        "mean_S_qbm": float(frame["S_qbm"].mean()),
        "std_S_qbm": float(frame["S_qbm"].std(ddof=0)),
        "mean_S_bm": float(frame["S_bm"].mean()),
        "std_S_bm": float(frame["S_bm"].std(ddof=0)),
    }
    outputs = [
        _write_csv(frame, out / "patterns.csv"),
        _write_csv(pl.concat(scatter), out / "patterns_scatter.csv"),
        _write_json(summary, out / "summary.json"),
    ]
    return RunOutcome(summary, outputs, _exhausted(*results))


def run_bell(out: Path, points: int = 101) -> RunOutcome:
    """Bell scan on `bell_grid(points)` along both axes; outputs bell.csv and summary.json."""
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    grid = bell_grid(points)
    frame = bell_scan(grid, grid)
    best = frame.row(int(frame["B"].arg_max()), named=True)
    summary = {"kind": "bell", "points": points, "max_B": best["B"], "theta": best["theta"], "phi": best["phi"]}
    outputs = [_write_csv(frame, out / "bell.csv"), _write_json(summary, out / "summary.json")]
    return RunOutcome(summary, outputs)


def run_experiment(
    exp: ExperimentSpec,
    out: Path,
    cfg: LearnConfig,
    jobs: int = 1,
    cache_dir: Path | None = None,
    betas: Sequence[float] = DEFAULT_BETAS,
    seeds: Sequence[int] | None = None,
    instances: int = 10,
    points: int = 101,
) -> RunOutcome:
    """Dispatch an ExperimentSpec to its driver."""
    exp.validate()
    if exp.kind in ("afh", "xyz"):
        return run_chain(exp, out, cfg, jobs, cache_dir)
    if exp.kind == "spin_glass":
        return run_spin_glass(exp.n, betas, seeds or [exp.seed], out, cfg, jobs, cache_dir)
    if exp.kind == "parity":
        return run_parity(exp.n, out, cfg, jobs, cache_dir)
    if exp.kind == "patterns":
        return run_patterns(
            exp.n,
            instances,
            out,
            cfg,
            n_patterns=exp.params.get("n_patterns", 8),
            noise=exp.params.get("noise", 0.1),
            seed=exp.seed,
            jobs=jobs,
            cache_dir=cache_dir,
        )
    return run_bell(out, points)
