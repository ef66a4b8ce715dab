from .cache import FitCache
from .data import (
    DataError,
    DataWavefunction,
    EmpiricalDistribution,
    classical_moments,
    conditional_determinism,
    data_density,
    data_moments,
    from_samples,
    from_table,
    marginal,
    quantum_moments,
    single_spin_table,
)
from .learning import (
    ClassicalModel,
    LearnConfig,
    LearningError,
    LearnResult,
    QuantumModel,
    Termination,
    classical_likelihood,
    fit_bm,
    fit_qbm,
    gradient,
    quantum_likelihood,
    relative_entropy,
)
from .parse import read_distribution, read_moments, read_samples, write_distribution, write_moments

__all__ = [
    "ClassicalModel",
    "DataError",
    "DataWavefunction",
    "EmpiricalDistribution",
    "FitCache",
    "LearnConfig",
    "LearnResult",
    "LearningError",
    "QuantumModel",
    "Termination",
    "classical_likelihood",
    "classical_moments",
    "conditional_determinism",
    "data_density",
    "data_moments",
    "fit_bm",
    "fit_qbm",
    "from_samples",
    "from_table",
    "gradient",
    "marginal",
    "quantum_likelihood",
    "quantum_moments",
    "read_distribution",
    "read_moments",
    "read_samples",
    "relative_entropy",
    "single_spin_table",
    "write_distribution",
    "write_moments",
]
