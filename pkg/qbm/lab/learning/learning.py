"""Gradient ascent on the quantum likelihood L(w) = ⟨H⟩_η - log Z.

The QBM evaluates model statistics ⟨H_r⟩_ρ on ρ = e^H / Z through a full
eigendecomposition; the classical BM is the diagonal special case, evaluated on the
2^n energies without any decomposition.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from functools import cached_property
from typing import Sequence

import numpy as np
import polars as pl
from scipy.special import logsumexp

from qbm.lab.quantum.density import MomentVector, moments
from qbm.lab.quantum.matrices import DensityMatrix, HermitianOperator
from qbm.lab.quantum.operators import HamiltonianSpec, PauliTerm, boltzmann_density, build_hamiltonian, log_partition
from qbm.lab.quantum.spin_basis import check_spin_count, site_signs

log = logging.getLogger(__name__)

INIT_RULES = ("zero", "normal", "spec")

TRACE_SCHEMA = {"iter": pl.Int64, "L": pl.Float64, "max_grad": pl.Float64, "dL": pl.Float64}


class LearningError(Exception):
    pass


class Termination(str, Enum):
    CONVERGED = "converged"
    WEIGHT_CAP = "weight_cap"
    MAX_ITERS = "max_iters"


@dataclass
class LearnConfig:
    """Gradient-ascent settings.

    Attributes
    ----------
    epsilon : float
        Learning rate of w ← w + ε (⟨H_r⟩_η - ⟨H_r⟩_ρ).
    max_iters : int
        Iteration budget.
    tol_dL : float
        Stop when |ΔL| < tol_dL.
    tol_grad : float
        Stop when max |gradient| < tol_grad (0 disables the criterion).
    weight_cap : float
        Stop when any |w_r| reaches this value (diverging couplings of rank-one targets).
    init : str
        Initial weights: "zero", "normal" (N(0, init_scale) with `seed`) or "spec"
        (the weights carried by the spec).
    log_every : int
        Log progress every `log_every` iterations.
    """

    epsilon: float = 0.1
    max_iters: int = 200_000
    tol_dL: float = 1e-15
    tol_grad: float = 0.0
    weight_cap: float = 30.0
    init: str = "zero"
    init_scale: float = 0.1
    seed: int | None = None
    log_every: int = 1000

    def __post_init__(self):
        if not self.epsilon > 0:
            msg = f"Learning rate must be positive, got {self.epsilon}"
            raise LearningError(msg)
        if self.max_iters < 0:
            msg = f"max_iters must be non-negative, got {self.max_iters}"
            raise LearningError(msg)
        if self.tol_dL < 0 or self.tol_grad < 0:
            msg = "Tolerances must be non-negative"
            raise LearningError(msg)
        if not self.weight_cap > 0:
            msg = f"weight_cap must be positive, got {self.weight_cap}"
            raise LearningError(msg)
        if self.init not in INIT_RULES:
            msg = f"Unknown init rule '{self.init}', expected one of {INIT_RULES}"
            raise LearningError(msg)
        if self.log_every < 1:
            msg = f"log_every must be at least 1, got {self.log_every}"
            raise LearningError(msg)

    def to_dict(self) -> dict:
        return asdict(self)

    def initial_weights(self, spec: HamiltonianSpec) -> np.ndarray:
        if self.init == "spec":
            return spec.weights
        if self.init == "normal":
            rng = np.random.default_rng(self.seed)
            return rng.normal(0.0, self.init_scale, len(spec))
        return np.zeros(len(spec))


@dataclass(frozen=True, eq=False)
class LearnResult:
    """Outcome of one fit.

    `trace` has one row per gradient step: the iteration, L after the step, the
    max |gradient| that drove it and the change ΔL.
    """

    mode: str
    spec: HamiltonianSpec
    termination: Termination
    likelihood: float
    final_moment_error: float
    model_moments: np.ndarray
    trace: pl.DataFrame = field(repr=False)

    @property
    def weights(self) -> np.ndarray:
        return self.spec.weights

    @property
    def iterations(self) -> int:
        return self.trace.height

    @property
    def non_unique(self) -> bool:
        """True when stopped at the weight cap: the target is rank deficient and w diverges."""
        return self.termination == Termination.WEIGHT_CAP

    @cached_property
    def hamiltonian(self) -> HermitianOperator:
        return build_hamiltonian(self.spec)

    @cached_property
    def density(self) -> DensityMatrix:
        return boltzmann_density(self.hamiltonian)

    @cached_property
    def probabilities(self) -> np.ndarray:
        """Diagonal of ρ; for the BM this is p(s), computed without a decomposition."""
        if self.spec.is_classical:
            return ClassicalModel(self.spec).probabilities(self.weights)
        return self.density.diagonal

    def summary(self) -> dict:
        return {
            "mode": self.mode,
            "termination": self.termination.value,
            "iters": self.iterations,
            "L": self.likelihood,
            "final_moment_error": self.final_moment_error,
            "max_weight": float(np.max(np.abs(self.weights))) if len(self.spec) else 0.0,
            "non_unique": self.non_unique,
        }

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "n": self.spec.n,
            "terms": [[t.kind, list(t.sites), t.axis, t.weight] for t in self.spec.terms],
            "termination": self.termination.value,
            "likelihood": self.likelihood,
            "final_moment_error": self.final_moment_error,
            "model_moments": self.model_moments.tolist(),
            "trace": self.trace.to_dict(as_series=False),
        }

    @classmethod
    def from_dict(cls, data: dict) -> LearnResult:
        terms = tuple(PauliTerm(kind, tuple(sites), axis, weight) for kind, sites, axis, weight in data["terms"])
        return cls(
            mode=data["mode"],
            spec=HamiltonianSpec(data["n"], terms),
            termination=Termination(data["termination"]),
            likelihood=data["likelihood"],
            final_moment_error=data["final_moment_error"],
            model_moments=np.asarray(data["model_moments"], dtype=np.float64),
            trace=pl.DataFrame(data["trace"], schema=TRACE_SCHEMA),
        )


class QuantumModel:
    """ρ(w) = e^H(w) / Z(w) over the terms of a spec."""

    mode = "qbm"

    def __init__(self, spec: HamiltonianSpec):
        check_spin_count(spec.n)
        self.spec = spec

    def evaluate(self, weights: np.ndarray) -> tuple[float, np.ndarray]:
        """Return log Z(w) and ⟨H_r⟩_ρ(w)."""
        hamiltonian = build_hamiltonian(self.spec.with_weights(weights))
        rho = boltzmann_density(hamiltonian)
        return rho.log_partition, moments(self.spec, rho).values


class ClassicalModel:
    """p(s) ∝ exp(Σ_r w_r H_r(s)) for a z-only spec, on the 2^n classical energies."""

    mode = "bm"

    def __init__(self, spec: HamiltonianSpec):
        if not spec.is_classical:
            axes = sorted({t.axis for t in spec.terms} - {"z"})
            msg = f"The classical model only takes z-axis terms, got {axes}"
            raise LearningError(msg)
        check_spin_count(spec.n)
        self.spec = spec

    @cached_property
    def signs(self) -> np.ndarray:
        """H_r(s) for every term r and configuration s, shape (R, 2^n)."""
        if not len(self.spec):
            return np.zeros((0, 2**self.spec.n))
        return np.stack([site_signs(self.spec.n, t.sites) for t in self.spec.terms]).astype(np.float64)

    def energies(self, weights: np.ndarray) -> np.ndarray:
        return np.asarray(weights, dtype=np.float64) @ self.signs

    def probabilities(self, weights: np.ndarray) -> np.ndarray:
        energies = self.energies(weights)
        p = np.exp(energies - logsumexp(energies))
        return p / p.sum()

    def evaluate(self, weights: np.ndarray) -> tuple[float, np.ndarray]:
        energies = self.energies(weights)
        log_z = float(logsumexp(energies))
        p = np.exp(energies - log_z)
        return log_z, np.clip(self.signs @ p, -1.0, 1.0)


def _target(spec: HamiltonianSpec, target: MomentVector | Sequence[float]) -> np.ndarray:
    if isinstance(target, MomentVector):
        values = target.align(spec)
    else:
        values = np.asarray(target, dtype=np.float64)
    if values.shape != (len(spec),):
        msg = f"Expected {len(spec)} target moments, got shape {values.shape}"
        raise LearningError(msg)
    if np.any(np.abs(values) > 1 + 1e-9):
        msg = "Target moments must lie in [-1, 1]"
        raise LearningError(msg)
    return values


def _weights(spec: HamiltonianSpec, w: Sequence[float]) -> np.ndarray:
    w = np.asarray(w, dtype=np.float64)
    if w.shape != (len(spec),):
        msg = f"Expected {len(spec)} weights, got shape {w.shape}"
        raise LearningError(msg)
    return w


def quantum_likelihood(spec: HamiltonianSpec, w: Sequence[float], target: MomentVector | Sequence[float]) -> float:
    """L(w) = Σ_r w_r ⟨H_r⟩_η - log Z(w)."""
    w = _weights(spec, w)
    hamiltonian = build_hamiltonian(spec.with_weights(w))
    return float(w @ _target(spec, target) - log_partition(hamiltonian))


def classical_likelihood(spec: HamiltonianSpec, w: Sequence[float], target: MomentVector | Sequence[float]) -> float:
    """L(w) = Σ_r w_r ⟨H_r⟩_q - log Σ_s exp(Σ_r w_r H_r(s)) for a z-only spec."""
    w = _weights(spec, w)
    model = ClassicalModel(spec)
    return float(w @ _target(spec, target) - logsumexp(model.energies(w)))


def gradient(spec: HamiltonianSpec, w: Sequence[float], target: MomentVector | Sequence[float]) -> np.ndarray:
    """∂L/∂w_r = ⟨H_r⟩_η - ⟨H_r⟩_ρ(w)."""
    w = _weights(spec, w)
    _, model_moments = QuantumModel(spec).evaluate(w)
    return _target(spec, target) - model_moments


def relative_entropy(likelihood: float, eta_entropy: float) -> float:
    """S(η, ρ) = -S(η) - L, from the likelihood and the von Neumann entropy of η."""
    value = -eta_entropy - likelihood
    if value < -1e-9:
        msg = f"Negative cross entropy {value:.3e}: the entropy of the target is inconsistent with its moments"
        log.warning(msg)
    return max(value, 0.0)


def _ascend(model: QuantumModel | ClassicalModel, target: np.ndarray, cfg: LearnConfig) -> LearnResult:
    spec = model.spec
    w = cfg.initial_weights(spec).astype(np.float64)
    log_z, model_moments = model.evaluate(w)
    likelihood = float(w @ target - log_z)
    rows = []
    termination = Termination.MAX_ITERS

    msg = f"Fitting {model.mode} on {spec.n} spins, {len(spec)} terms, L0={likelihood:.12g}"
    log.info(msg)
    for iteration in range(1, cfg.max_iters + 1):
        grad = target - model_moments
        max_grad = float(np.max(np.abs(grad))) if grad.size else 0.0
        w = w + cfg.epsilon * grad
        log_z, model_moments = model.evaluate(w)
        new_likelihood = float(w @ target - log_z)
        if not math.isfinite(new_likelihood):
            msg = f"Likelihood diverged at iteration {iteration}: L={new_likelihood}, max |w|={np.max(np.abs(w)):.3g}"
            raise LearningError(msg)
        d_likelihood = new_likelihood - likelihood
        if d_likelihood < -1e-12:
            msg = f"L decreased by {-d_likelihood:.3e} at iteration {iteration}; lower the learning rate"
            log.warning(msg)
        rows.append((iteration, new_likelihood, max_grad, d_likelihood))
        likelihood = new_likelihood

        if iteration % cfg.log_every == 0:
            msg = f"[{model.mode}] iter {iteration}: L={likelihood:.12g} max_grad={max_grad:.3e} dL={d_likelihood:.3e}"
            log.info(msg)
        if abs(d_likelihood) < cfg.tol_dL or (cfg.tol_grad > 0 and max_grad < cfg.tol_grad):
            termination = Termination.CONVERGED
            break
        if grad.size and np.max(np.abs(w)) >= cfg.weight_cap:
            termination = Termination.WEIGHT_CAP
            break

    final_error = float(np.max(np.abs(target - model_moments))) if target.size else 0.0
    msg = (
        f"[{model.mode}] {termination.value} after {len(rows)} iterations: "
        f"L={likelihood:.12g} final_moment_error={final_error:.3e}"
    )
    log.info(msg)
    return LearnResult(
        mode=model.mode,
        spec=spec.with_weights(w),
        termination=termination,
        likelihood=likelihood,
        final_moment_error=final_error,
        model_moments=np.asarray(model_moments, dtype=np.float64),
        trace=pl.DataFrame(rows, schema=TRACE_SCHEMA, orient="row"),
    )


def fit_qbm(
    spec: HamiltonianSpec, target: MomentVector | Sequence[float], cfg: LearnConfig | None = None
) -> LearnResult:
    """Learn the weights of ρ = e^H / Z whose statistics match `target`.

    Parameters
    ----------
    spec : HamiltonianSpec
        Model terms H_r (their weights are only used with `init="spec"`).
    target : MomentVector or array-like
        Data statistics ⟨H_r⟩_η.
    cfg : LearnConfig, optional
        Gradient-ascent settings.

    Returns
    -------
    LearnResult
        Learned spec, termination reason and per-iteration trace.
    """
    cfg = cfg or LearnConfig()
    return _ascend(QuantumModel(spec), _target(spec, target), cfg)


def fit_bm(
    spec: HamiltonianSpec, target: MomentVector | Sequence[float], cfg: LearnConfig | None = None
) -> LearnResult:
    """Classical Boltzmann machine learning on a z-only spec.

    Raises
    ------
    LearningError
        If the spec contains x- or y-axis terms.
    """
    cfg = cfg or LearnConfig()
    return _ascend(ClassicalModel(spec), _target(spec, target), cfg)
