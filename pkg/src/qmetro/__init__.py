"""Desk-scale simulator for 1D-cluster-state quantum parameter estimation.

Simulates N-qubit Lindblad evolution under dephasing, depolarizing and
damping channels, computes precision curves delta-chi*sqrt(T) with joint
chi-sensitivity propagation, and reproduces the improvement sweeps, closed
forms and scaling tables of the chain-Hamiltonian estimation scheme.
"""

__version__ = "0.1.0"

from .analytic import (
    OmegaDomainError,
    build_matrix_a,
    closed_form_deviation,
    closed_form_expectation_n2,
    derive_matrix_a,
    envelope,
    epsilon_series,
    evolve_expm,
    hump_positions,
    minima_and_times,
    scaling_expansion,
)
from .config import ConfigError, RunConfig, load_config, parse_config_text
from .dynamics import (
    PrecisionCurve,
    Trajectory,
    expectation_curve,
    integrate,
    lindblad_rhs,
    precision_curve,
)
from .metrology import (
    SweepRow,
    gamma_sweep,
    improvement,
    min_deviation,
    scaling_table,
    simulate_estimator,
)
from .model import (
    ChannelKind,
    ExperimentConfig,
    NoiseChannel,
    Scheme,
    build_cluster_state,
    build_hamiltonian,
    build_measurement,
    build_probe_state,
    default_final_time,
    jump_operators,
    stabilizer,
)
from .pauli import (
    ObservableOperator,
    PauliError,
    PauliString,
    apply_string,
    expectation,
    pauli_multiply,
    variance,
)
from .pauliprop import coefficient_curve
