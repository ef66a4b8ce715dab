"""Empirical distributions of classical spin data and their quantum statistics.

A dataset of ±1 configurations is promoted to the rank-one density matrix
η = |ψ⟩⟨ψ| with ⟨s|ψ⟩ = √q(s). All statistics of η are computed directly from q
over its support, without building η.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Mapping, Sequence

import numpy as np
import polars as pl

from qbm.lab.quantum.density import MomentVector, single_spin_entropy
from qbm.lab.quantum.matrices import DensityMatrix
from qbm.lab.quantum.operators import HamiltonianSpec
from qbm.lab.quantum.spin_basis import SpinConfig, check_spin_count, site_mask, spins_to_indices

log = logging.getLogger(__name__)

NORMALIZATION_ATOL = 1e-12


class DataError(ValueError):
    pass


def _signs(indices: np.ndarray, sites: Iterable[int]) -> np.ndarray:
    signs = np.ones(indices.shape[0], dtype=np.float64)
    for i in sites:
        signs *= 1 - 2 * ((indices >> i) & 1)
    return signs


@dataclass(frozen=True)
class EmpiricalDistribution:
    """Sparse distribution q(s) over the 2^n basis.

    Attributes
    ----------
    n : int
        Spin count.
    indices : np.ndarray
        Supported basis indices, strictly increasing.
    probabilities : np.ndarray
        q(s) > 0 for each supported index, summing to 1.
    """

    n: int
    indices: np.ndarray
    probabilities: np.ndarray

    def __post_init__(self):
        indices = np.asarray(self.indices, dtype=np.int64)
        probabilities = np.asarray(self.probabilities, dtype=np.float64)
        if indices.shape != probabilities.shape or indices.ndim != 1:
            msg = f"Got {indices.shape} indices for {probabilities.shape} probabilities"
            raise DataError(msg)
        if indices.size == 0:
            msg = "Empty distribution"
            raise DataError(msg)
        if np.any(np.diff(indices) <= 0):
            msg = "Support indices must be strictly increasing"
            raise DataError(msg)
        if indices[0] < 0 or indices[-1] >= 2**self.n:
            msg = f"Support index out of range for {self.n} spins"
            raise DataError(msg)
        if np.any(probabilities <= 0):
            msg = "Probabilities on the support must be positive"
            raise DataError(msg)
        total = probabilities.sum()
        if abs(total - 1) > NORMALIZATION_ATOL:
            msg = f"Probabilities sum to {total:.15f}, expected 1"
            raise DataError(msg)
        indices.flags.writeable = False
        probabilities.flags.writeable = False
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "probabilities", probabilities)

    def __len__(self) -> int:
        return self.indices.shape[0]

    @classmethod
    def from_weights(cls, n: int, indices: Sequence[int], weights: Sequence[float]) -> EmpiricalDistribution:
        """Normalize non-negative weights; zero weights are dropped and repeated indices summed."""
        indices = np.asarray(indices, dtype=np.int64)
        weights = np.asarray(weights, dtype=np.float64)
        if np.any(weights < 0) or not np.all(np.isfinite(weights)):
            msg = "Weights must be finite and non-negative"
            raise DataError(msg)
        unique, inverse = np.unique(indices, return_inverse=True)
        summed = np.bincount(inverse, weights=weights, minlength=unique.shape[0])
        keep = summed > 0
        if not np.any(keep):
            msg = "All weights are zero"
            raise DataError(msg)
        return cls(n, unique[keep], summed[keep] / summed[keep].sum())

    @cached_property
    def _lookup(self) -> dict[int, float]:
        return dict(zip(self.indices.tolist(), self.probabilities.tolist()))

    def probability(self, index: int) -> float:
        return self._lookup.get(int(index), 0.0)

    def partner_probabilities(self, mask: int) -> np.ndarray:
        """q(F s) for every supported s, where F flips the bits in `mask`."""
        partners = self.indices ^ mask
        positions = np.searchsorted(self.indices, partners)
        positions = np.minimum(positions, self.indices.shape[0] - 1)
        found = self.indices[positions] == partners
        return np.where(found, self.probabilities[positions], 0.0)

    def dense(self) -> np.ndarray:
        """q as a dense vector of length 2^n."""
        q = np.zeros(2**self.n)
        q[self.indices] = self.probabilities
        return q

    @property
    def entropy(self) -> float:
        """Shannon entropy of q in nats."""
        return float(-np.sum(self.probabilities * np.log(self.probabilities)))

    def to_frame(self) -> pl.DataFrame:
        return pl.DataFrame(
            {
                "state": [SpinConfig(self.n, int(s)).label for s in self.indices],
                "index": self.indices,
                "q": self.probabilities,
            },
            schema={"state": pl.String, "index": pl.Int64, "q": pl.Float64},
        )


def from_samples(samples: Sequence[Sequence[int]] | np.ndarray) -> EmpiricalDistribution:
    """Empirical distribution q(s^μ) = N(s^μ) / N of ±1 samples.

    Parameters
    ----------
    samples : array-like of shape (N, n)
        Spin configurations with entries +1 or -1.

    Returns
    -------
    EmpiricalDistribution
        Counts of unique configurations over the sample count.
    """
    try:
        samples = np.asarray(samples)
    except ValueError as e:
        msg = "Samples have inconsistent lengths"
        raise DataError(msg) from e
    if samples.ndim != 2 or samples.shape[0] == 0 or samples.shape[1] == 0:
        msg = f"Expected a non-empty (samples, spins) array, got shape {samples.shape}"
        raise DataError(msg)
    if samples.dtype == object:
        msg = "Samples have inconsistent lengths"
        raise DataError(msg)
    if not np.all(np.isin(samples, (-1, 1))):
        msg = "Sample entries must be +1 or -1"
        raise DataError(msg)
    n = check_spin_count(samples.shape[1], limit=62)
    indices, counts = np.unique(spins_to_indices(samples), return_counts=True)
    q = EmpiricalDistribution(n, indices, counts / samples.shape[0])
    msg = f"{samples.shape[0]} samples on {n} spins, {len(q)} distinct configurations"
    log.debug(msg)
    return q


def from_table(n: int, table: Mapping[int, float] | Mapping[tuple, float], atol: float = 1e-9) -> EmpiricalDistribution:
    """Exact distribution from a table of basis index (or ±1 tuple) to probability.

    Probabilities summing to 1 within `atol` are renormalized exactly; zero entries are
    dropped from the support.
    """
    indices, weights = [], []
    for key, value in table.items():
        if isinstance(key, tuple):
            if len(key) != n:
                msg = f"Configuration {key} does not have {n} spins"
                raise DataError(msg)
            key = SpinConfig.from_spins(key).index
        indices.append(int(key))
        weights.append(float(value))
    total = float(np.sum(weights)) if weights else 0.0
    if abs(total - 1) > atol:
        msg = f"Probabilities sum to {total:.12f}, expected 1"
        raise DataError(msg)
    if len(set(indices)) != len(indices):
        msg = "Duplicate configurations in distribution table"
        raise DataError(msg)
    return EmpiricalDistribution.from_weights(n, indices, weights)


@dataclass(frozen=True)
class DataWavefunction:
    """Real non-negative amplitudes ψ(s) = √q(s) over the full basis."""

    amplitudes: np.ndarray

    @classmethod
    def from_distribution(cls, q: EmpiricalDistribution) -> DataWavefunction:
        return cls(np.sqrt(q.dense()))

    @property
    def n(self) -> int:
        return int(self.amplitudes.shape[0]).bit_length() - 1


def data_density(q: EmpiricalDistribution) -> DensityMatrix:
    """Rank-one data density matrix η = ψψᵀ."""
    check_spin_count(q.n)
    return DensityMatrix.from_state(DataWavefunction.from_distribution(q).amplitudes)


def _check_n(spec: HamiltonianSpec, q: EmpiricalDistribution):
    if spec.n != q.n:
        msg = f"Spec has {spec.n} spins, data {q.n}"
        raise DataError(msg)


def _term_moment(q: EmpiricalDistribution, sites: tuple[int, ...], axis: str) -> float:
    if axis == "z":
        return float(np.dot(q.probabilities, _signs(q.indices, sites)))
    overlap = np.sqrt(q.probabilities * q.partner_probabilities(site_mask(q.n, sites)))
    if axis == "x":
        return float(overlap.sum())
    # σ^y strings carry i^k Π s; only the real part survives on a real η
    phase = (1j) ** len(sites)
    if phase.real == 0:
        return 0.0
    return float(phase.real * np.dot(overlap, _signs(q.indices, sites)))


def classical_moments(spec: HamiltonianSpec, q: EmpiricalDistribution) -> MomentVector:
    """⟨s_i⟩_q and ⟨s_i s_j⟩_q for the z-axis terms of `spec`."""
    _check_n(spec, q)
    terms = [t for t in spec.terms if t.axis == "z"]
    values = [_term_moment(q, t.sites, "z") for t in terms]
    return MomentVector(tuple(t.key for t in terms), np.clip(values, -1.0, 1.0))


def quantum_moments(spec: HamiltonianSpec, q: EmpiricalDistribution) -> MomentVector:
    """⟨σ^x⟩ and ⟨σ^y⟩ statistics of η for the x- and y-axis terms of `spec`.

    ⟨σ_i^x⟩ = Σ_s √(q(F_i s) q(s)), ⟨σ_i^y⟩ = 0, ⟨σ_i^x σ_j^x⟩ = Σ_s √(q(F_i F_j s) q(s))
    and ⟨σ_i^y σ_j^y⟩ = -Σ_s s_i s_j √(q(F_i F_j s) q(s)), all summed over the support.
    """
    _check_n(spec, q)
    terms = [t for t in spec.terms if t.axis != "z"]
    values = [_term_moment(q, t.sites, t.axis) for t in terms]
    return MomentVector(tuple(t.key for t in terms), np.clip(values, -1.0, 1.0))


def data_moments(spec: HamiltonianSpec, q: EmpiricalDistribution) -> MomentVector:
    """All statistics of η in the term order of `spec`."""
    return MomentVector.merge(spec, classical_moments(spec, q), quantum_moments(spec, q))


def marginal(q: EmpiricalDistribution, sites: Iterable[int]) -> EmpiricalDistribution:
    """Marginal on `sites`, relabelled 0..k-1 in increasing site order."""
    sites = sorted(set(int(i) for i in sites))
    if not sites or sites[0] < 0 or sites[-1] >= q.n:
        msg = f"Invalid site subset {sites} for {q.n} spins"
        raise DataError(msg)
    reduced = np.zeros_like(q.indices)
    for k, i in enumerate(sites):
        reduced |= ((q.indices >> i) & 1) << k
    return EmpiricalDistribution.from_weights(len(sites), reduced, q.probabilities)


def conditional_determinism(q: EmpiricalDistribution, i: int) -> bool:
    """True when s_i is a deterministic function of the other spins on the support.

    Equivalent to ⟨σ_i^x⟩_η = 0: no supported s has its flipped partner F_i s supported.
    """
    if not 0 <= i < q.n:
        msg = f"Site {i} out of range for {q.n} spins"
        raise DataError(msg)
    return not np.any(q.partner_probabilities(1 << i) > 0)


def single_spin_table(q: EmpiricalDistribution) -> pl.DataFrame:
    """Bloch vector (m_x, m_y, m_z) and entanglement entropy of every spin of η.

    The reduced state of spin i is (I + m·σ) / 2 with m_z = ⟨s_i⟩_q, m_x = ⟨σ_i^x⟩_η and
    m_y = 0; its entropy is the entanglement of spin i with the rest.
    """
    rows = []
    for i in range(q.n):
        m_x = _term_moment(q, (i,), "x")
        m_z = _term_moment(q, (i,), "z")
        length = float(np.hypot(m_x, m_z))
        scale = max(length, 1.0)
        rows.append(
            {
                "i": i,
                "m_x": m_x,
                "m_y": 0.0,
                "m_z": m_z,
                "m": length,
                "entropy": single_spin_entropy(m_x / scale, 0.0, m_z / scale),
            }
        )
    schema = {k: pl.Float64 for k in ("m_x", "m_y", "m_z", "m", "entropy")}
    return pl.DataFrame(rows, schema={"i": pl.Int64, **schema})
