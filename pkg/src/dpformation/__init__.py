"""Differentially private formation control: noisy consensus dynamics,
Gaussian-mechanism noise calibration, spectral and Markov-chain performance
bounds, privacy design thresholds, and sensitivity analysis."""

from .graphs import (
    NumericalError,
    PerronMatrix,
    StepSizeTooLarge,
    WeightedGraph,
    algebraic_connectivity,
    build_perron,
    build_standard_topology,
    is_connected,
    kemeny_constant,
    laplacian,
    random_connected_graph,
    stationary_distribution,
    topology_lambda2,
)
from .privacy import (
    PrivacyParams,
    is_adjacent,
    kappa,
    noise_scale,
    q_function,
    q_inverse,
    sample_noise,
)
from .dynamics import (
    EssEstimate,
    FormationSpec,
    NonMixingWarning,
    TrialEnsemble,
    beta,
    default_horizon,
    error_series,
    estimate_ess,
    noise_covariance_diag,
    noise_gain,
    noiseless_step,
    private_step,
    private_step_network,
    private_step_node,
    run_trials,
    trial_rng,
)
from .bounds import (
    BoundReport,
    ThresholdCell,
    bound_report,
    bound_surface,
    corollary1_bound,
    epsilon_threshold_closed_form,
    epsilon_threshold_numeric,
    exact_ess_oracle,
    kemeny_spectral_bounds,
    lemma7_sandwich,
    reproduce_table1,
    theorem1_bound,
)
from .config import ConfigError, RunConfig, demo_config
from .config import load as load_config
from .sensitivity import (
    CutoffReport,
    SensitivityPoint,
    SensitivityReport,
    dominance_quadratic,
    partial_epsilon,
    partial_lambda2,
    sensitivity_compare,
    theorem3_thresholds,
)

__version__ = "0.1.0"
