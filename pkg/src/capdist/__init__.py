"""Capacity-distortion-cost tradeoff for joint state sensing and communication.

A transmitter sends data over a state-dependent memoryless channel and, from
generalized feedback, estimates the channel state.  This package computes the
best rate compatible with a given estimation distortion and input cost.
"""
from .builders import (
    AwgnModelSpec,
    build_binary_multiplicative,
    build_fading_awgn,
    build_pam_constellation,
    quantize_gaussian_state,
    quantized_state_variance,
    unconstrained_capacity_reference,
)
from .channel import (
    ChannelError,
    DistortionMatrix,
    StateChannel,
    from_perfect_feedback,
    load_channel,
    marginal_y_given_xs,
    marginal_z_given_x,
    save_channel,
    validate_channel,
)
from .estimator import (
    EstimatorTable,
    distortion_cost,
    min_distortion,
    optimal_estimator,
    posterior_s_given_xz,
)
from .solver import (
    InfeasibleError,
    SolveOptions,
    SolveResult,
    conditional_mutual_information,
    cost_vector,
    j_functional,
    solve,
    update_p,
    update_q,
)
from .tradeoff import (
    TradeoffCurve,
    binary_closed_form,
    check_curve_properties,
    default_mu_grid,
    grid_oracle,
    h2,
    separation_baseline,
    sweep,
)

__version__ = "0.1.0"
