"""Robust adaptive FIR disturbance rejection toolkit.

Simulates a feedback loop with an RLS-updated adaptive FIR outer controller,
certifies robust stability via a scaled small-gain condition on the loop
interconnection, computes the largest safe FIR gain bound, and applies an
online safety filter that saturates the adaptive command.
"""

from .adaptive import (
    DisturbanceEstimator,
    FirState,
    RlsState,
    fir_output,
    rls_regressor,
    rls_update,
    set_fir_coefficients,
)
from .lft import (
    LftPartition,
    SmallGainCertificate,
    beta_star,
    beta_star_from_norms,
    build_afdr_lft,
    check_scaled_small_gain,
    scaled_m11_norm_bounds,
)
from .lti import (
    AlgebraicLoopError,
    LtiError,
    StateSpace,
    TransferFunction,
    UnstableSystemError,
    as_state_space,
    feedback_unity,
    frequency_response,
    from_blocks,
    impulse_response,
    induced_linf_norm,
    is_stable,
    load_system,
    negate,
    parallel,
    save_system,
    series,
    simulate,
    spectral_radius,
    static_gain,
    subsystem,
    tf_to_ss,
)
from .safety import (
    FilterDecision,
    SafeSet,
    matrix_inf_norm,
    safety_filter_clip,
    safety_filter_solve,
)
from .sim import (
    DisturbanceParams,
    MonteCarloResult,
    ScenarioConfig,
    SimResult,
    config_hash,
    disturbance_sample,
    monte_carlo,
    run_scenario,
    write_summary_json,
    write_trace_csv,
)
from .uncertainty import POLE_RADIUS, UncertaintySpec, paper_delta, random_delta

__version__ = "0.1.0"
