from .models import (
    EXPERIMENT_KINDS,
    ExperimentSpec,
    ParameterError,
    afh_chain,
    bell_grid,
    bell_observables,
    bell_scan,
    bell_value,
    fully_correlated_pair,
    parity_distribution,
    pattern_mixture,
    spin_glass,
    xyz_chain,
)
from .runner import (
    RunOutcome,
    run_bell,
    run_chain,
    run_experiment,
    run_parity,
    run_patterns,
    run_spin_glass,
)

__all__ = [
    "EXPERIMENT_KINDS",
    "ExperimentSpec",
    "ParameterError",
    "RunOutcome",
    "afh_chain",
    "bell_grid",
    "bell_observables",
    "bell_scan",
    "bell_value",
    "fully_correlated_pair",
    "parity_distribution",
    "pattern_mixture",
    "run_bell",
    "run_chain",
    "run_experiment",
    "run_parity",
    "run_patterns",
    "run_spin_glass",
    "spin_glass",
    "xyz_chain",
]
