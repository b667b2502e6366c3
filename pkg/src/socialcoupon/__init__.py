"""Seed selection and social coupon allocation for redemption-rate
maximization under an independent cascade with per-user coupon limits."""

from .baselines import (
    CouponStrategy,
    apply_coupon_strategy,
    baseline_im_s,
    baseline_run,
    greedy_seed_selection,
)
from .graph import (
    INFINITE_COST,
    Deployment,
    GraphFormatError,
    NodeEconomics,
    SocialGraph,
    generate_synthetic,
    load_edge_list,
    scale_ratios,
)
from .harness import ExperimentConfig, MetricRow, emit_csv, parse_config, run_experiment
from .investment import IdState, MarginalRedemption, build_pivot_queue, deploy_investment, marginal_redemption
from .maneuver import (
    ManeuverOperation,
    ManeuverSet,
    S3caResult,
    amelioration_index,
    apply_sc_maneuver,
    derive_maneuvers,
    deterioration_index,
    maneuver_gap,
    run_s3ca,
)
from .oracle import (
    ApproxBoundInputs,
    ExactEstimator,
    InstanceTooLarge,
    approximation_bound,
    exact_expected_benefit,
    optimal_deployment,
)
from .paths import GuaranteedPath, identify_guaranteed_paths
from .propagation import (
    BenefitEstimate,
    CascadeOutcome,
    EstimatorConfig,
    MonteCarloEstimator,
    coupon_tail_prob,
    estimate_benefit,
    expected_sc_cost,
    hop_stats,
    redemption_rate,
    simulate_cascade,
)

__version__ = "0.1.0"
