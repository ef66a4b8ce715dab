"""Target systems and datasets: spin chains, spin glasses, parity and pattern data, Bell pairs."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import polars as pl

from qbm.lab.learning.data import EmpiricalDistribution, data_density, from_table
from qbm.lab.quantum.density import anticommutator, expectation
from qbm.lab.quantum.matrices import DensityMatrix, HermitianOperator, QuantumError
from qbm.lab.quantum.operators import (
    AXES,
    HamiltonianSpec,
    PauliTerm,
    boltzmann_density,
    build_hamiltonian,
    complete_spec,
)
from qbm.lab.quantum.spin_basis import basis_spins, check_spin_count

log = logging.getLogger(__name__)

EXPERIMENT_KINDS = ("afh", "xyz", "spin_glass", "parity", "patterns", "bell")
XYZ_COUPLINGS = (-0.2, -0.6, -0.4)
BELL_ATOL = 1e-10


class ParameterError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    """Parameters of one experiment.

    Attributes
    ----------
    kind : str
        One of afh, xyz, spin_glass, parity, patterns, bell.
    n : int
        Spin count (ignored for bell, which always uses 2 spins).
    beta : float
        Inverse temperature of the spin glass.
    seed : int
        Seed of every random draw (xyz fields, spin-glass weights, patterns).
    params : dict
        Kind-specific parameters: `couplings` and `field_scale` for xyz, `n_patterns`
        and `noise` for patterns.
    """

    kind: str
    n: int = 10
    beta: float = 1.0
    seed: int = 0
    params: dict = field(default_factory=dict)

    def validate(self) -> ExperimentSpec:
        if self.kind not in EXPERIMENT_KINDS:
            msg = f"Unknown experiment kind '{self.kind}', expected one of {EXPERIMENT_KINDS}"
            raise ParameterError(msg)
        if self.kind in ("afh", "xyz", "parity") and self.n < 3:
            msg = f"{self.kind} needs at least 3 spins, got {self.n}"
            raise ParameterError(msg)
        if self.kind == "spin_glass":
            if self.n < 2:
                msg = f"spin_glass needs at least 2 spins, got {self.n}"
                raise ParameterError(msg)
            if not self.beta > 0:
                msg = f"beta must be positive, got {self.beta}"
                raise ParameterError(msg)
        if self.kind == "patterns":
            if self.params.get("n_patterns", 8) < 1:
                msg = "patterns needs at least one pattern"
                raise ParameterError(msg)
            if not 0 <= self.params.get("noise", 0.1) < 0.5:
                msg = f"noise must lie in [0, 0.5), got {self.params.get('noise')}"
                raise ParameterError(msg)
        if self.kind != "bell":
            check_spin_count(self.n)
        return self


def chain_bonds(n: int) -> list[tuple[int, int]]:
    """Nearest-neighbour pairs (i, j), i < j, of a periodic chain; a single bond for n = 2."""
    if n == 2:
        return [(0, 1)]
    return [tuple(sorted((i, (i + 1) % n))) for i in range(n)]


def afh_chain(n: int) -> HamiltonianSpec:
    """Periodic Heisenberg chain with all couplings w_ij^k = -1 and no fields.

    Its top eigenvector is the antiferromagnetic ground state. n = 2 gives the open
    pair whose top eigenvector is the singlet.
    """
    if n < 2:
        msg = f"afh_chain needs at least 2 spins, got {n}"
        raise ParameterError(msg)
    terms = [PauliTerm.coupling(i, j, k, -1.0) for i, j in chain_bonds(n) for k in AXES]
    return HamiltonianSpec(n, tuple(terms))


def xyz_chain(
    n: int,
    wx: float = XYZ_COUPLINGS[0],
    wy: float = XYZ_COUPLINGS[1],
    wz: float = XYZ_COUPLINGS[2],
    field_seed: int = 0,
    field_scale: float = 1.0,
) -> HamiltonianSpec:
    """Periodic XYZ chain with random Gaussian fields.

    Parameters
    ----------
    n : int
        Spin count (at least 3).
    wx, wy, wz : float, optional
        Nearest-neighbour couplings per axis (default -0.2, -0.6, -0.4).
    field_seed : int, optional
        Seed of the standard-normal field draws w_i^k.
    field_scale : float, optional
        Multiplier of the fields; 0 emits no field terms.

    Returns
    -------
    HamiltonianSpec
        Field terms (site, then axis) followed by the chain couplings (bond, then axis).
    """
    if n < 3:
        msg = f"xyz_chain needs at least 3 spins, got {n}"
        raise ParameterError(msg)
    terms = []
    if field_scale != 0:
        fields = np.random.default_rng(field_seed).standard_normal((n, 3)) * field_scale
        terms += [PauliTerm.field(i, k, fields[i, a]) for i in range(n) for a, k in enumerate(AXES)]
    couplings = dict(zip(AXES, (wx, wy, wz)))
    terms += [PauliTerm.coupling(i, j, k, couplings[k]) for i, j in chain_bonds(n) for k in AXES]
    return HamiltonianSpec(n, tuple(terms))


def spin_glass(n: int, beta: float, seed: int = 0) -> tuple[HamiltonianSpec, DensityMatrix]:
    """Random all-to-all quantum spin glass and its thermal state η = e^(βH) / Z.

    Fields w_i^k ~ N(0, 1) and couplings w_ij^k ~ N(0, 1/√n) on every site, pair and
    axis. The returned spec carries the unscaled weights w.
    """
    if n < 2:
        msg = f"spin_glass needs at least 2 spins, got {n}"
        raise ParameterError(msg)
    if not beta > 0:
        msg = f"beta must be positive, got {beta}"
        raise ParameterError(msg)
    rng = np.random.default_rng(seed)
    fields = rng.normal(0.0, 1.0, (n, 3))
    couplings = rng.normal(0.0, 1.0 / np.sqrt(n), (n * (n - 1) // 2, 3))
    spec = complete_spec(n, weights=np.concatenate([fields.ravel(), couplings.ravel()]))
    eta = boltzmann_density(build_hamiltonian(spec.scaled(beta)))
    return spec, eta


def parity_distribution(n: int) -> EmpiricalDistribution:
    """Spins 0..n-2 drawn from q ∝ exp((1/(n-1)) Σ_{i≠j} s_i s_j), spin n-1 their parity Π s_i.

    The sum runs over ordered pairs, so every unordered pair carries coupling 2/(n-1).
    """
    if n < 3:
        msg = f"parity_distribution needs at least 3 spins, got {n}"
        raise ParameterError(msg)
    check_spin_count(n)
    spins = basis_spins(n - 1).astype(np.int64)
    total = spins.sum(axis=1)
    pair_sum = (total**2 - (n - 1)) // 2
    log_weights = 2 * pair_sum / (n - 1)
    parity_bit = (np.prod(spins, axis=1) == -1).astype(np.int64)
    indices = np.arange(2 ** (n - 1), dtype=np.int64) | (parity_bit << (n - 1))
    weights = np.exp(log_weights - log_weights.max())
    return EmpiricalDistribution.from_weights(n, indices, weights)


def random_patterns(n: int, n_patterns: int, seed: int = 0) -> np.ndarray:
    return np.random.default_rng(seed).choice(np.array([-1, 1], dtype=np.int8), size=(n_patterns, n))


def pattern_mixture(n: int, n_patterns: int = 8, noise: float = 0.1, seed: int = 0) -> EmpiricalDistribution:
    """Exact mixture of random patterns with independent per-spin flip noise.

    q(s) = (1/P) Σ_μ Π_i [noise + (1 - 2 noise) δ(s_i, ξ_i^μ)] for P uniformly drawn
    patterns ξ^μ.
    """
    if n_patterns < 1:
        msg = "pattern_mixture needs at least one pattern"
        raise ParameterError(msg)
    if not 0 <= noise <= 0.5:
        msg = f"noise must lie in [0, 0.5], got {noise}"
        raise ParameterError(msg)
    check_spin_count(n)
    patterns = random_patterns(n, n_patterns, seed)
    spins = basis_spins(n)
    q = np.zeros(2**n)
    for pattern in patterns:
        q += np.prod(np.where(spins == pattern, 1.0 - noise, noise), axis=1)
    return EmpiricalDistribution.from_weights(n, np.arange(2**n), q)


def fully_correlated_pair() -> EmpiricalDistribution:
    """Two bits that are always equal: q(++) = q(--) = 1/2."""
    return from_table(2, {(1, 1): 0.5, (-1, -1): 0.5})


def _single_spin(site: int, angle: float) -> HermitianOperator:
    terms = (PauliTerm.field(site, "x", np.sin(angle)), PauliTerm.field(site, "z", np.cos(angle)))
    return build_hamiltonian(HamiltonianSpec(2, terms))


def bell_observables(theta: float, phi: float) -> tuple[HermitianOperator, HermitianOperator, HermitianOperator]:
    """a = σ_0^z, b = σ_0^x sin θ + σ_0^z cos θ and c = σ_1^x sin φ + σ_1^z cos φ on two spins."""
    return _single_spin(0, 0.0), _single_spin(0, theta), _single_spin(1, phi)


def bell_value(theta: float | np.ndarray, phi: float | np.ndarray) -> float | np.ndarray:
    """B(θ, φ) = |cos θ - cos φ| - 1 + cos(θ - φ); positive values violate the Bell inequality."""
    return np.abs(np.cos(theta) - np.cos(phi)) - 1 + np.cos(theta - phi)


def bell_grid(points: int = 101) -> np.ndarray:
    """`points` uniform angles on [0, π] plus π/3 and 2π/3, where B reaches its maximum 1/2."""
    return np.union1d(np.linspace(0, np.pi, points), [np.pi / 3, 2 * np.pi / 3])


def bell_scan(
    theta_grid: Sequence[float] | None = None,
    phi_grid: Sequence[float] | None = None,
    eta: DensityMatrix | None = None,
) -> pl.DataFrame:
    """Evaluate B(θ, φ) on a grid, through the closed form and through expectations on η.

    Pair correlations of non-commuting observables are taken on their symmetrised product
    (AB + BA) / 2. The grids default to `bell_grid()` and η to the data density matrix of
    `fully_correlated_pair`.

    Returns
    -------
    pl.DataFrame
        Columns theta, phi, B, one row per grid point (theta-major).

    Raises
    ------
    QuantumError
        If the two evaluations differ by more than 1e-10 anywhere on the grid.
    """
    theta_grid = bell_grid() if theta_grid is None else np.asarray(theta_grid, dtype=np.float64)
    phi_grid = bell_grid() if phi_grid is None else np.asarray(phi_grid, dtype=np.float64)
    if theta_grid.size == 0 or phi_grid.size == 0:
        msg = "Bell grids must be non-empty"
        raise ParameterError(msg)
    eta = data_density(fully_correlated_pair()) if eta is None else eta

    a = _single_spin(0, 0.0)
    bs = [_single_spin(0, theta) for theta in theta_grid]
    cs = [_single_spin(1, phi) for phi in phi_grid]
    ab = np.array([expectation(anticommutator(a, b), eta) for b in bs])
    ac = np.array([expectation(anticommutator(a, c), eta) for c in cs])
    bc = np.array([[expectation(anticommutator(b, c), eta) for c in cs] for b in bs])
    from_density = np.abs(ab[:, None] - ac[None, :]) + bc - 1

    thetas, phis = np.meshgrid(theta_grid, phi_grid, indexing="ij")
    closed_form = bell_value(thetas, phis)
    deviation = float(np.max(np.abs(from_density - closed_form)))
    if deviation > BELL_ATOL:
        msg = f"Closed-form and density-matrix Bell values differ by {deviation:.3e}"
        raise QuantumError(msg)
    msg = f"Bell scan on {thetas.size} points, max B = {closed_form.max():.10f}, path deviation {deviation:.2e}"
    log.info(msg)
    return pl.DataFrame({"theta": thetas.ravel(), "phi": phis.ravel(), "B": from_density.ravel()})
