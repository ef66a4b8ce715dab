"""Pauli-term Hamiltonians, their spectra and the Boltzmann density matrix ρ = e^H / Z."""

from __future__ import annotations

import itertools
import logging
import math
import warnings
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from typing import Iterable, Sequence

import numpy as np
from scipy.special import logsumexp, softmax

from .matrices import DensityMatrix, HermitianOperator, Spectrum
from .spin_basis import check_site, check_spin_count, flip_indices, site_signs

log = logging.getLogger(__name__)

AXES = ("x", "y", "z")
KINDS = ("field", "coupling")


class SpecError(ValueError):
    pass


class DegenerateStateWarning(UserWarning):
    pass


@dataclass(frozen=True)
class PauliTerm:
    """One weighted term w σ_i^k (field) or w σ_i^k σ_j^k (coupling), with i < j."""

    kind: str
    sites: tuple[int, ...]
    axis: str
    weight: float = 0.0

    def __post_init__(self):
        if self.kind not in KINDS:
            msg = f"Unknown term kind '{self.kind}'"
            raise SpecError(msg)
        if self.axis not in AXES:
            msg = f"Unknown axis '{self.axis}'"
            raise SpecError(msg)
        expected = 1 if self.kind == "field" else 2
        if len(self.sites) != expected:
            msg = f"A {self.kind} term needs {expected} site(s), got {self.sites}"
            raise SpecError(msg)
        if any(i < 0 for i in self.sites):
            msg = f"Negative site in {self.sites}"
            raise SpecError(msg)
        if self.kind == "coupling" and not self.sites[0] < self.sites[1]:
            msg = f"Coupling sites must be distinct and ordered i < j, got {self.sites}"
            raise SpecError(msg)
        if not math.isfinite(self.weight):
            msg = f"Non-finite weight {self.weight} for {self.kind} {self.sites} {self.axis}"
            raise SpecError(msg)

    @classmethod
    def field(cls, i: int, axis: str, weight: float = 0.0) -> PauliTerm:
        return cls("field", (int(i),), axis, float(weight))

    @classmethod
    def coupling(cls, i: int, j: int, axis: str, weight: float = 0.0) -> PauliTerm:
        return cls("coupling", (int(i), int(j)), axis, float(weight))

    @property
    def key(self) -> tuple[str, tuple[int, ...], str]:
        return (self.kind, self.sites, self.axis)

    def with_weight(self, weight: float) -> PauliTerm:
        return PauliTerm(self.kind, self.sites, self.axis, float(weight))


@dataclass(frozen=True)
class HamiltonianSpec:
    """H = Σ_r w_r H_r: an ordered list of Pauli terms on n spins.

    Term order defines the index r of w_r and H_r in every aligned vector.
    """

    n: int
    terms: tuple[PauliTerm, ...] = field(default_factory=tuple)

    def __post_init__(self):
        object.__setattr__(self, "terms", tuple(self.terms))
        if self.n < 1:
            msg = f"Spin count must be positive, got {self.n}"
            raise SpecError(msg)
        seen = set()
        for term in self.terms:
            for i in term.sites:
                if i >= self.n:
                    msg = f"Site {i} out of range for {self.n} spins"
                    raise SpecError(msg)
            if term.key in seen:
                msg = f"Duplicate term {term.kind} {term.sites} {term.axis}"
                raise SpecError(msg)
            seen.add(term.key)

    def __len__(self) -> int:
        return len(self.terms)

    @cached_property
    def keys(self) -> list[tuple[str, tuple[int, ...], str]]:
        return [term.key for term in self.terms]

    @cached_property
    def _positions(self) -> dict:
        return {key: r for r, key in enumerate(self.keys)}

    def index(self, key: tuple[str, tuple[int, ...], str]) -> int:
        return self._positions[key]

    @property
    def weights(self) -> np.ndarray:
        return np.array([term.weight for term in self.terms], dtype=np.float64)

    @property
    def is_classical(self) -> bool:
        """True when every term is diagonal (z-axis only)."""
        return all(term.axis == "z" for term in self.terms)

    def with_weights(self, weights: Sequence[float]) -> HamiltonianSpec:
        weights = np.asarray(weights, dtype=np.float64)
        if weights.shape != (len(self.terms),):
            msg = f"Expected {len(self.terms)} weights, got shape {weights.shape}"
            raise SpecError(msg)
        return HamiltonianSpec(self.n, tuple(t.with_weight(w) for t, w in zip(self.terms, weights)))

    def scaled(self, beta: float) -> HamiltonianSpec:
        return self.with_weights(beta * self.weights)

    def restrict(self, axes: Iterable[str]) -> HamiltonianSpec:
        """Sub-spec with the terms on the given axes, original order kept."""
        axes = set(axes)
        return HamiltonianSpec(self.n, tuple(t for t in self.terms if t.axis in axes))


def complete_spec(n: int, axes: Iterable[str] = AXES, weights: Sequence[float] | None = None) -> HamiltonianSpec:
    """Every field and every pair coupling on the given axes.

    Fields come first (by site, then axis), then couplings (by (i, j), then axis).
    """
    axes = [k for k in AXES if k in set(axes)]
    terms = [PauliTerm.field(i, k) for i in range(n) for k in axes]
    terms += [PauliTerm.coupling(i, j, k) for i, j in itertools.combinations(range(n), 2) for k in axes]
    spec = HamiltonianSpec(n, tuple(terms))
    if weights is not None:
        spec = spec.with_weights(weights)
    return spec


@lru_cache(maxsize=4096)
def pauli_action(n: int, sites: tuple[int, ...], axis: str) -> tuple[np.ndarray, np.ndarray]:
    """Flip structure of a unit-weight Pauli string on equal axes.

    Returns (targets, amplitudes) such that P|s⟩ = amplitudes[s] |targets[s]⟩, i.e. the
    only non-zero entries of P are P[targets[s], s] = amplitudes[s]. Uses σ^z|s⟩ = s|s⟩,
    σ^x|s⟩ = |-s⟩ and σ^y|s⟩ = i s|-s⟩.
    """
    for i in sites:
        check_site(n, i)
    signs = site_signs(n, sites).astype(np.complex128)
    if axis == "z":
        targets = flip_indices(n, ())
        amplitudes = signs
    elif axis == "x":
        targets = flip_indices(n, sites)
        amplitudes = np.ones(2**n, dtype=np.complex128)
    elif axis == "y":
        targets = flip_indices(n, sites)
        amplitudes = (1j ** len(sites)) * signs
    else:
        msg = f"Unknown axis '{axis}'"
        raise SpecError(msg)
    targets.flags.writeable = False
    amplitudes.flags.writeable = False
    return targets, amplitudes


def build_hamiltonian(spec: HamiltonianSpec, max_spins: int | None = None) -> HermitianOperator:
    """Dense matrix of H = Σ_r w_r H_r in the spin basis.

    Parameters
    ----------
    spec : HamiltonianSpec
        Weighted Pauli terms.
    max_spins : int, optional
        Override of the spin-count guard (default from `spin_basis.max_spins`).

    Returns
    -------
    HermitianOperator
        ⟨s'|H|s⟩ = Σ_i (w_i^x + i w_i^y s_i) δ(s', F_i s) + Σ_{i<j} (w_ij^x - w_ij^y s_i s_j) δ(s', F_i F_j s)
        + (Σ_i w_i^z s_i + Σ_{i<j} w_ij^z s_i s_j) δ(s', s).
    """
    n = check_spin_count(spec.n, max_spins)
    dim = 2**n
    columns = np.arange(dim)
    matrix = np.zeros((dim, dim), dtype=np.complex128)
    for term in spec.terms:
        if term.weight == 0:
            continue
        targets, amplitudes = pauli_action(n, term.sites, term.axis)
        matrix[targets, columns] += term.weight * amplitudes
    return HermitianOperator(matrix, n=n)


def term_operator(n: int, term: PauliTerm) -> HermitianOperator:
    """Matrix of a single Pauli term with unit weight."""
    return build_hamiltonian(HamiltonianSpec(n, (term.with_weight(1.0),)))


def spectral_decompose(operator: HermitianOperator) -> HermitianOperator:
    """Populate the spectrum cache of `operator` and return it."""
    operator.decompose()
    return operator


def log_partition(hamiltonian: HermitianOperator) -> float:
    """log Z = log Tr e^H, computed as ε_max + log Σ_s e^(ε_s - ε_max)."""
    return float(logsumexp(hamiltonian.eigenvalues()))


def boltzmann_density(hamiltonian: HermitianOperator) -> DensityMatrix:
    """ρ = e^H / Tr e^H through the spectrum of H."""
    spectrum = hamiltonian.decompose()
    energies = spectrum.eigenvalues
    probabilities = softmax(energies)
    u = spectrum.eigenvectors
    matrix = (u * probabilities) @ u.conj().T
    matrix = (matrix + matrix.conj().T) / 2
    return DensityMatrix(
        matrix,
        n=hamiltonian.n,
        spectrum=Spectrum(eigenvalues=probabilities, eigenvectors=u),
        hamiltonian=hamiltonian,
        log_partition=float(logsumexp(energies)),
    )


def ground_state(hamiltonian: HermitianOperator, gap_tolerance: float = 1e-10) -> np.ndarray:
    """Eigenvector of the largest eigenvalue of H (the β → ∞ limit of e^(βH) / Z).

    The phase is fixed so that the largest-magnitude component is real positive. A top
    eigenvalue degenerate within `gap_tolerance` emits a `DegenerateStateWarning`.
    """
    spectrum = hamiltonian.decompose()
    energies = spectrum.eigenvalues
    if len(energies) > 1:
        gap = energies[-1] - energies[-2]
        if gap < gap_tolerance:
            msg = f"Top eigenvalue {energies[-1]:.6g} is degenerate (gap {gap:.3e})"
            log.debug(msg)
            warnings.warn(msg, DegenerateStateWarning, stacklevel=2)
    return spectrum.eigenvectors[:, -1].copy()
