from .density import (
    MomentVector,
    anticommutator,
    classical_mutual_information,
    cross_entropy,
    cross_entropy_matrices,
    diagonal_density,
    expectation,
    kl_divergence,
    moments,
    mutual_information,
    partial_trace,
    schmidt_entanglement,
    shannon_entropy,
    single_spin_entanglement,
    single_spin_entropy,
    von_neumann_entropy,
)
from .matrices import DensityMatrix, DimensionError, HermiticityError, HermitianOperator, QuantumError, Spectrum
from .operators import (
    DegenerateStateWarning,
    HamiltonianSpec,
    PauliTerm,
    SpecError,
    boltzmann_density,
    build_hamiltonian,
    complete_spec,
    ground_state,
    log_partition,
    spectral_decompose,
    term_operator,
)
from .parse import ParseError, read_spec, write_spec
from .spin_basis import SiteError, SpinConfig, SpinCountError, basis_spins, flip, spin_value

__all__ = [
    "DegenerateStateWarning",
    "DensityMatrix",
    "DimensionError",
    "HamiltonianSpec",
    "HermiticityError",
    "HermitianOperator",
    "MomentVector",
    "ParseError",
    "PauliTerm",
    "QuantumError",
    "SiteError",
    "SpecError",
    "Spectrum",
    "SpinConfig",
    "SpinCountError",
    "anticommutator",
    "basis_spins",
    "boltzmann_density",
    "build_hamiltonian",
    "classical_mutual_information",
    "complete_spec",
    "cross_entropy",
    "cross_entropy_matrices",
    "diagonal_density",
    "expectation",
    "flip",
    "ground_state",
    "kl_divergence",
    "log_partition",
    "moments",
    "mutual_information",
    "partial_trace",
    "read_spec",
    "schmidt_entanglement",
    "shannon_entropy",
    "single_spin_entanglement",
    "single_spin_entropy",
    "spectral_decompose",
    "spin_value",
    "term_operator",
    "von_neumann_entropy",
    "write_spec",
]
