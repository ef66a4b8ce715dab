"""Dense Hermitian operators and density matrices on the 2^n spin basis."""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.linalg

log = logging.getLogger(__name__)


class QuantumError(Exception):
    pass


class DimensionError(QuantumError, ValueError):
    pass


class HermiticityError(QuantumError):
    pass


@dataclass(frozen=True)
class Spectrum:
    """Eigendecomposition A = U diag(eigenvalues) U†, eigenvalues ascending."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    def reconstruct(self) -> np.ndarray:
        u = self.eigenvectors
        return (u * self.eigenvalues) @ u.conj().T


def fix_phases(vectors: np.ndarray) -> np.ndarray:
    """Rotate every column so that its largest-magnitude component is real positive.

    Ties within 1e-9 are broken by the lowest basis index, which keeps the choice stable
    under round-off.
    """
    magnitudes = np.abs(vectors)
    threshold = magnitudes.max(axis=0) - 1e-9
    pivots = np.argmax(magnitudes >= threshold, axis=0)
    pivot_values = vectors[pivots, np.arange(vectors.shape[1])]
    phases = pivot_values / np.abs(pivot_values)
    return vectors / phases


def spin_count(dim: int) -> int:
    n = int(dim).bit_length() - 1
    if dim < 1 or 2**n != dim:
        msg = f"Matrix dimension {dim} is not a power of 2"
        raise DimensionError(msg)
    return n


class HermitianOperator:
    """Dense complex Hermitian matrix on n spins with a lazily computed spectrum.

    The matrix is stored read-only; the spectrum is computed at most once.
    """

    HERMITIAN_ATOL = 1e-12
    SYMMETRIZE_ATOL = 1e-8
    RECONSTRUCTION_ATOL = 1e-9

    def __init__(self, matrix: np.ndarray, n: int | None = None, spectrum: Spectrum | None = None):
        matrix = np.asarray(matrix, dtype=np.complex128)
        if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
            msg = f"Expected a square matrix, got shape {matrix.shape}"
            raise DimensionError(msg)
        dim_n = spin_count(matrix.shape[0])
        if n is not None and n != dim_n:
            msg = f"Matrix of dimension {matrix.shape[0]} does not act on {n} spins"
            raise DimensionError(msg)
        asymmetry = np.max(np.abs(matrix - matrix.conj().T)) if matrix.size else 0.0
        if asymmetry > self.HERMITIAN_ATOL:
            if asymmetry > self.SYMMETRIZE_ATOL:
                msg = f"Matrix is not Hermitian (max asymmetry {asymmetry:.3e})"
                raise HermiticityError(msg)
            matrix = (matrix + matrix.conj().T) / 2
        matrix = np.array(matrix, copy=True)
        matrix.flags.writeable = False
        self.n = dim_n
        self.matrix = matrix
        self._spectrum = spectrum

    def __repr__(self) -> str:
        return f"{type(self).__name__}(n={self.n})"

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @property
    def spectrum(self) -> Spectrum | None:
        """Cached spectrum, or None if not decomposed yet."""
        return self._spectrum

    @cached_property
    def is_real(self) -> bool:
        return not np.any(self.matrix.imag)

    @cached_property
    def is_diagonal(self) -> bool:
        return not np.any(self.matrix - np.diag(np.diag(self.matrix)))

    def decompose(self) -> Spectrum:
        """Compute (once) and return the spectrum, eigenvalues ascending.

        Eigenvector columns are phase-fixed with `fix_phases`.
        """
        if self._spectrum is None:
            if self.is_real:
                eigenvalues, eigenvectors = scipy.linalg.eigh(self.matrix.real)
                eigenvectors = eigenvectors.astype(np.complex128)
            else:
                eigenvalues, eigenvectors = scipy.linalg.eigh(self.matrix)
            self._spectrum = Spectrum(eigenvalues=eigenvalues, eigenvectors=fix_phases(eigenvectors))
        return self._spectrum

    def eigenvalues(self) -> np.ndarray:
        return self.decompose().eigenvalues

    def check_spectrum(self) -> float:
        """Return the max-norm reconstruction error of the cached spectrum."""
        error = float(np.max(np.abs(self.decompose().reconstruct() - self.matrix)))
        if error > self.RECONSTRUCTION_ATOL:
            msg = f"Spectral reconstruction error {error:.3e} exceeds {self.RECONSTRUCTION_ATOL}"
            raise HermiticityError(msg)
        return error


class DensityMatrix(HermitianOperator):
    """Hermitian, positive semidefinite, unit-trace operator.

    A density matrix built from a Boltzmann form keeps a reference to its generator
    `hamiltonian` and `log_partition` so that log ρ = H − log Z·I is available exactly.
    """

    TRACE_ATOL = 1e-10
    NEGATIVE_ATOL = 1e-10

    def __init__(
        self,
        matrix: np.ndarray,
        n: int | None = None,
        spectrum: Spectrum | None = None,
        eigenvalues: np.ndarray | None = None,
        hamiltonian: HermitianOperator | None = None,
        log_partition: float | None = None,
    ):
        super().__init__(matrix, n=n, spectrum=spectrum)
        trace = np.trace(self.matrix).real
        if abs(trace - 1) > self.TRACE_ATOL:
            msg = f"Density matrix trace is {trace:.12f}, expected 1"
            raise QuantumError(msg)
        self._eigenvalues = eigenvalues
        self.hamiltonian = hamiltonian
        self.log_partition = log_partition

    @classmethod
    def from_state(cls, psi: np.ndarray) -> DensityMatrix:
        """Pure state |ψ⟩⟨ψ| of a normalized state vector."""
        psi = np.asarray(psi, dtype=np.complex128)
        norm = np.vdot(psi, psi).real
        if abs(norm - 1) > 1e-10:
            msg = f"State vector has squared norm {norm:.12f}, expected 1"
            raise QuantumError(msg)
        eigenvalues = np.zeros(psi.shape[0])
        eigenvalues[-1] = 1.0
        return cls(np.outer(psi, psi.conj()), eigenvalues=eigenvalues)

    def eigenvalues(self) -> np.ndarray:
        """Eigenvalues ascending, checked for positivity.

        Uses the cached spectrum when present, otherwise eigenvalues only.
        """
        if self._eigenvalues is None:
            if self._spectrum is not None:
                values = self._spectrum.eigenvalues
            elif self.is_real:
                values = scipy.linalg.eigvalsh(self.matrix.real)
            else:
                values = scipy.linalg.eigvalsh(self.matrix)
            if values[0] < -self.NEGATIVE_ATOL:
                msg = f"Density matrix has negative eigenvalue {values[0]:.3e}"
                raise QuantumError(msg)
            self._eigenvalues = values
        return self._eigenvalues

    @property
    def diagonal(self) -> np.ndarray:
        return np.diag(self.matrix).real.copy()
