"""Artificial-noise aided interference alignment for MIMO wiretap networks.

The package covers the full pipeline: reproducible channel generation,
the leakage-minimization and max-eigenmode alignment solvers, analytic
feasibility and cancellation predictors, closed-form secrecy outage with a
Monte Carlo oracle, and the outage-constrained secrecy-rate power split.

A compiled extension accelerates the alternation inner loops when built;
``secalign.backend_name()`` reports which backend is active.
"""

from ._backend import backend_name
from .alignment import (
    CancellationCheck,
    SolverSettings,
    TransceiverSolution,
    detect_cancellation,
    leakage_lm,
    leakage_meb,
    lm_ia_solve,
    meb_ia_solve,
    refine_va,
    solution_from_json,
    solution_to_json,
)
from .channel import (
    AlignmentMatrices,
    ChannelSet,
    NetworkConfig,
    build_alignment_matrices,
    generate_channels,
    parse_config_text,
)
from .errors import ConfigurationError, InfeasibilityError, NumericError, ShapeError
from .feasibility import (
    FeasibilityReport,
    FlopEstimate,
    estimate_flops,
    lm_necessary_condition,
    meb_necessary_condition,
    predict_cancellation,
)
from .harness import (
    ExperimentSpec,
    ResultRecord,
    compare_isotropic,
    default_spec,
    run_experiment,
    secrecy_model_from_solution,
)
from .secrecy import (
    EveFilters,
    MonteCarloSop,
    PowerProfile,
    SecrecyModel,
    SrmBranch,
    SrmSolution,
    eve_sinr_ccdf,
    isotropic_theta,
    positive_rate_threshold,
    rs_of_theta,
    rs_prime,
    sample_eve_components,
    sinr_eve_sample,
    solve_w,
    sop_closed_form,
    sop_monte_carlo,
    srm_solve,
    theta_high_snr,
    w_prime,
    with_theta,
)

__version__ = "0.1.0"
