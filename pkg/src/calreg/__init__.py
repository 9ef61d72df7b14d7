"""Online calibration through swap-regret minimization on a sin^2 grid.

The forecaster reduces calibrated prediction to per-grid-point external
regret: one exp-concave expert per grid value, combined each round through a
stationary distribution of their advice matrix, with randomized rounding of
expert predictions onto the grid.
"""
from .adversaries import (
    Adversary,
    AdversarySpec,
    adaptive_antimode,
    dualgame_forecast,
    fixed_sequence,
    from_file,
    iid_bernoulli,
    make_adversary,
    next_label,
    piecewise_drift,
)
from .ewoo import EwooState, ewoo_predict, ewoo_quadrature_oracle, ewoo_update
from .forecaster import (
    ForecasterState,
    RoundDistribution,
    SolverConfig,
    expert_predictions,
    forecaster_update,
    init_forecaster,
    sample_index,
    stationary_distribution,
    step_distribution,
)
from .grid import (
    INTERIOR,
    PADDED,
    Grid,
    bracket,
    build_grid,
    default_K,
    max_grid_kl_gap,
    nearest_index,
)
from .harness import (
    RunConfig,
    RunRecord,
    SweepResult,
    emit_report,
    load_report_lines,
    run_experiment,
    run_rounds,
    sweep_and_fit_rate,
)
from .losses import (
    LossSpec,
    bregman,
    catalog,
    get_loss,
    kl_bernoulli,
    log_loss,
    loss_from_univariate,
    loss_value,
    spherical_loss,
    squared_loss,
    tsallis_loss,
    univariate_second_derivative,
    univariate_value,
)
from .metrics import (
    MetricReport,
    Transcript,
    cal_q,
    compute_report,
    external_regret,
    hp_margin,
    klcal,
    load_transcript,
    pcal_q,
    pklcal,
    save_transcript,
    swap_regret_bruteforce,
    swap_regret_closed_form,
    swap_regret_enumeration,
    transcript_from_predictions,
)
from .rounding import (
    TwoPointDistribution,
    actual_overhead,
    baseline_linear,
    baseline_nearest,
    overhead_bound,
    rounding_distribution,
)

__version__ = "0.1.0"
