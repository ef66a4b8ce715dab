"""Density-matrix calculus: expectations, entropies, partial traces and entanglement.

All logarithms are natural; entropies and cross entropies are in nats.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence

import numpy as np
import polars as pl
from scipy.special import entr, rel_entr

from .matrices import DensityMatrix, DimensionError, HermitianOperator, QuantumError, spin_count
from .operators import HamiltonianSpec, PauliTerm, log_partition, pauli_action

log = logging.getLogger(__name__)

EIGENVALUE_CUTOFF = 1e-14
IMAGINARY_ATOL = 1e-10
MOMENT_ATOL = 1e-9


@dataclass(frozen=True)
class MomentVector:
    """Pauli-term expectations aligned with the term order of a HamiltonianSpec."""

    keys: tuple
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        object.__setattr__(self, "keys", tuple(self.keys))
        object.__setattr__(self, "values", values)
        if values.shape != (len(self.keys),):
            msg = f"Got {values.shape[0]} values for {len(self.keys)} terms"
            raise DimensionError(msg)
        if np.any(np.abs(values) > 1 + MOMENT_ATOL):
            msg = f"Pauli expectation outside [-1, 1]: {values[np.abs(values) > 1 + MOMENT_ATOL]}"
            raise QuantumError(msg)

    def __len__(self) -> int:
        return len(self.keys)

    def __getitem__(self, key) -> float:
        return float(self.values[self.keys.index(key)])

    def align(self, spec: HamiltonianSpec) -> np.ndarray:
        """Values reordered to the term order of `spec`."""
        positions = {key: r for r, key in enumerate(self.keys)}
        missing = [key for key in spec.keys if key not in positions]
        if missing:
            msg = f"No moment for terms {missing}"
            raise DimensionError(msg)
        return self.values[[positions[key] for key in spec.keys]]

    @classmethod
    def merge(cls, spec: HamiltonianSpec, *parts: MomentVector) -> MomentVector:
        """Combine partial moment vectors into one aligned with `spec`."""
        table = {}
        for part in parts:
            table.update(zip(part.keys, part.values))
        missing = [key for key in spec.keys if key not in table]
        if missing:
            msg = f"No moment for terms {missing}"
            raise DimensionError(msg)
        return cls(tuple(spec.keys), np.array([table[key] for key in spec.keys]))

    def to_frame(self) -> pl.DataFrame:
        """Moments as a `kind,i,j,axis,value` dataframe."""
        rows = [
            {
                "kind": kind,
                "i": sites[0],
                "j": sites[1] if len(sites) > 1 else None,
                "axis": axis,
                "value": float(value),
            }
            for (kind, sites, axis), value in zip(self.keys, self.values)
        ]
        schema = {"kind": pl.String, "i": pl.Int64, "j": pl.Int64, "axis": pl.String, "value": pl.Float64}
        return pl.DataFrame(rows, schema=schema)


def _check_same_n(a: HermitianOperator, b: HermitianOperator):
    if a.n != b.n:
        msg = f"Operators act on {a.n} and {b.n} spins"
        raise DimensionError(msg)


def expectation(operator: HermitianOperator, rho: DensityMatrix) -> float:
    """⟨A⟩_ρ = Tr(A ρ), real for Hermitian A."""
    _check_same_n(operator, rho)
    value = np.sum(operator.matrix * rho.matrix.T)
    if abs(value.imag) > IMAGINARY_ATOL:
        msg = f"Expectation has imaginary part {value.imag:.3e}"
        raise QuantumError(msg)
    return float(value.real)


def term_expectation(rho: DensityMatrix, term: PauliTerm) -> float:
    """⟨P⟩_ρ of a unit-weight Pauli term through its flip structure: Σ_s a(s) ρ(s, F s)."""
    targets, amplitudes = pauli_action(rho.n, term.sites, term.axis)
    return float(np.real(np.dot(amplitudes, rho.matrix[np.arange(rho.dim), targets])))


def moments(spec: HamiltonianSpec, rho: DensityMatrix) -> MomentVector:
    """⟨H_r⟩_ρ for every term of `spec`."""
    if spec.n != rho.n:
        msg = f"Spec has {spec.n} spins, density matrix {rho.n}"
        raise DimensionError(msg)
    values = np.array([term_expectation(rho, term) for term in spec.terms])
    return MomentVector(tuple(spec.keys), np.clip(values, -1.0, 1.0))


def _entropy_of(eigenvalues: np.ndarray) -> float:
    """-Σ λ log λ with λ ≤ 1e-14 contributing zero."""
    eigenvalues = np.where(eigenvalues > EIGENVALUE_CUTOFF, eigenvalues, 0.0)
    return float(np.sum(entr(eigenvalues)))


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """S(ρ) = -Tr ρ log ρ."""
    return _entropy_of(rho.eigenvalues())


def cross_entropy(eta: DensityMatrix, hamiltonian: HermitianOperator) -> float:
    """S(η, ρ) = Tr η log η - Tr η log ρ for ρ = e^H / Z given by its generator H.

    log ρ = H - log Z·I exactly, so S = Tr η log η - ⟨H⟩_η + log Z.
    """
    _check_same_n(eta, hamiltonian)
    value = -von_neumann_entropy(eta) - expectation(hamiltonian, eta) + log_partition(hamiltonian)
    if value < -1e-9:
        msg = f"Cross entropy {value:.3e} is negative"
        raise QuantumError(msg)
    return max(value, 0.0)


def cross_entropy_matrices(eta: DensityMatrix, rho: DensityMatrix, floor: float = 1e-300) -> float:
    """S(η, ρ) with log ρ taken from the spectrum of ρ.

    Eigenvalues of ρ below `floor` are clamped to it before the logarithm.
    """
    _check_same_n(eta, rho)
    if rho.hamiltonian is not None:
        return cross_entropy(eta, rho.hamiltonian)
    if rho.is_diagonal:
        log_rho = np.diag(np.log(np.maximum(rho.diagonal, floor)))
    else:
        spectrum = rho.decompose()
        u = spectrum.eigenvectors
        log_rho = (u * np.log(np.maximum(spectrum.eigenvalues, floor))) @ u.conj().T
    value = -von_neumann_entropy(eta) - float(np.real(np.sum(log_rho * eta.matrix.T)))
    return max(value, 0.0)


def diagonal_density(p: Sequence[float]) -> DensityMatrix:
    """Classical distribution p(s) as the diagonal density matrix diag(p)."""
    p = np.asarray(p, dtype=np.float64)
    if np.any(p < 0):
        msg = "Probabilities must be non-negative"
        raise QuantumError(msg)
    return DensityMatrix(np.diag(p), eigenvalues=np.sort(p))


def _axes_for(n: int, sites: Sequence[int]) -> list[int]:
    # numpy's row-major reshape puts the most significant bit (site n - 1) on axis 0
    return [n - 1 - i for i in sorted(sites, reverse=True)]


def _check_subset(n: int, sites: Iterable[int]) -> list[int]:
    sites = sorted(set(int(i) for i in sites))
    if not sites or len(sites) >= n or sites[0] < 0 or sites[-1] >= n:
        msg = f"{sites} is not a non-empty proper subset of {n} sites"
        raise DimensionError(msg)
    return sites


def partial_trace(rho: DensityMatrix, keep: Iterable[int]) -> DensityMatrix:
    """ρ_A = Tr_B ρ on the kept sites, relabelled 0..|A|-1 in increasing order."""
    n = rho.n
    keep = _check_subset(n, keep)
    traced = [i for i in range(n) if i not in keep]
    row_axes = _axes_for(n, keep) + _axes_for(n, traced)
    tensor = rho.matrix.reshape([2] * (2 * n)).transpose(row_axes + [n + a for a in row_axes])
    d_a, d_b = 2 ** len(keep), 2 ** len(traced)
    reduced = np.einsum("ibjb->ij", tensor.reshape(d_a, d_b, d_a, d_b))
    return DensityMatrix(reduced, n=len(keep))


def mutual_information(rho: DensityMatrix, sites: Iterable[int]) -> float:
    """I_AB = S(ρ_A) + S(ρ_B) - S(ρ) for A = `sites` and B its complement."""
    a = _check_subset(rho.n, sites)
    b = [i for i in range(rho.n) if i not in a]
    s_a = von_neumann_entropy(partial_trace(rho, a))
    s_b = von_neumann_entropy(partial_trace(rho, b))
    value = s_a + s_b - von_neumann_entropy(rho)
    return max(value, 0.0)


class Schmidt(NamedTuple):
    weights: np.ndarray
    entropy: float


def schmidt_entanglement(psi: np.ndarray, sites: Iterable[int]) -> Schmidt:
    """Schmidt decomposition of a pure state over A = `sites` and its complement.

    Returns the squared singular values λ_i of the reshaped state and -Σ λ_i log λ_i,
    the common entropy of both reduced density matrices.
    """
    psi = np.asarray(psi, dtype=np.complex128)
    n = spin_count(psi.shape[0])
    norm = np.vdot(psi, psi).real
    if abs(norm - 1) > 1e-10:
        msg = f"State vector has squared norm {norm:.12f}, expected 1"
        raise QuantumError(msg)
    a = _check_subset(n, sites)
    b = [i for i in range(n) if i not in a]
    matrix = psi.reshape([2] * n).transpose(_axes_for(n, a) + _axes_for(n, b)).reshape(2 ** len(a), 2 ** len(b))
    weights = np.linalg.svd(matrix, compute_uv=False) ** 2
    entropy = _entropy_of(weights)
    entropy_a = _entropy_of(np.linalg.eigvalsh(matrix @ matrix.conj().T))
    entropy_b = _entropy_of(np.linalg.eigvalsh(matrix.conj().T @ matrix))
    if abs(entropy_a - entropy_b) > 1e-9 or abs(entropy - entropy_a) > 1e-9:
        msg = f"Subsystem entropies differ: S(A)={entropy_a:.12f}, S(B)={entropy_b:.12f}"
        raise QuantumError(msg)
    return Schmidt(weights=weights, entropy=entropy)


def single_spin_entropy(m_x: float, m_y: float, m_z: float) -> float:
    """Entropy of the single-spin density matrix (I + m·σ) / 2.

    S = log 2 - ½ log(1 - m²) - ½ m log((1 + m) / (1 - m)), m = |m|, and 0 for m → 1.
    """
    m = float(np.sqrt(m_x**2 + m_y**2 + m_z**2))
    if m > 1 + 1e-12:
        msg = f"Bloch vector length {m} exceeds 1"
        raise QuantumError(msg)
    if m >= 1 - 1e-12:
        return 0.0
    return float(np.log(2) - 0.5 * np.log1p(-(m**2)) - 0.5 * m * np.log((1 + m) / (1 - m)))


def single_spin_entanglement(rho: DensityMatrix) -> pl.DataFrame:
    """Bloch vector and reduced entropy of every single spin."""
    rows = []
    for i in range(rho.n):
        m = [term_expectation(rho, PauliTerm.field(i, k)) for k in ("x", "y", "z")]
        length = float(np.sqrt(np.sum(np.square(m))))
        rows.append(
            {
                "i": i,
                "m_x": m[0],
                "m_y": m[1],
                "m_z": m[2],
                "m": length,
                "entropy": single_spin_entropy(*np.clip(m, -1, 1) / max(length, 1.0)),
            }
        )
    schema = {k: pl.Float64 for k in ("m_x", "m_y", "m_z", "m", "entropy")}
    return pl.DataFrame(rows, schema={"i": pl.Int64, **schema})


def anticommutator(a: HermitianOperator, b: HermitianOperator) -> HermitianOperator:
    """(AB + BA) / 2, the Hermitian part of the product AB."""
    _check_same_n(a, b)
    product = a.matrix @ b.matrix
    return HermitianOperator((product + product.conj().T) / 2, n=a.n)


def shannon_entropy(p: Sequence[float]) -> float:
    return float(np.sum(entr(np.asarray(p, dtype=np.float64))))


def kl_divergence(q: Sequence[float], p: Sequence[float]) -> float:
    """Classical cross entropy S(q, p) = Σ_s q(s) log(q(s) / p(s))."""
    q = np.asarray(q, dtype=np.float64)
    p = np.asarray(p, dtype=np.float64)
    if q.shape != p.shape:
        msg = f"Distributions have shapes {q.shape} and {p.shape}"
        raise DimensionError(msg)
    return float(np.sum(rel_entr(q, p)))


def classical_marginal(p: Sequence[float], sites: Iterable[int]) -> np.ndarray:
    """Marginal of a dense distribution over the 2^n basis on `sites` (relabelled in order)."""
    p = np.asarray(p, dtype=np.float64)
    n = spin_count(p.shape[0])
    keep = _check_subset(n, sites)
    traced = [i for i in range(n) if i not in keep]
    tensor = p.reshape([2] * n).transpose(_axes_for(n, keep) + _axes_for(n, traced))
    return tensor.reshape(2 ** len(keep), -1).sum(axis=1)


def classical_mutual_information(p: Sequence[float], sites: Iterable[int]) -> float:
    """I^c_AB = H(p_A) + H(p_B) - H(p)."""
    p = np.asarray(p, dtype=np.float64)
    n = spin_count(p.shape[0])
    a = _check_subset(n, sites)
    b = [i for i in range(n) if i not in a]
    return shannon_entropy(classical_marginal(p, a)) + shannon_entropy(classical_marginal(p, b)) - shannon_entropy(p)
