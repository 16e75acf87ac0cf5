"""UAV air-ground channel toolkit: trace synthesis and parameter extraction."""

__version__ = "0.1.0"

from .geometry import (
    CAMPUS_SCENARIO,
    LinkGeometry,
    LosState,
    ScenarioGeometry,
    SPEED_OF_LIGHT,
    breakpoint_distance,
    elevation_angle,
    link_distances,
    link_geometry,
    los_state,
    los_transition_altitude,
)
from .propagation import (
    ApplicabilityError,
    Frequency,
    PathLossParams,
    PATHLOSS_1GHZ,
    PATHLOSS_4GHZ,
    fspl,
    pl_3gpp_uma,
    pl_altitude_model,
)
from .stochastic import (
    FadingDistribution,
    Family,
    LogLogisticParams,
    NakagamiParams,
    RayleighParams,
    RicianParams,
    ShadowingParams,
    WeibullParams,
    db_to_envelope,
    envelope_to_db,
    fading_depth,
    percentile,
    sample_envelope,
    sample_shadowing,
)
from .extraction import (
    Decomposition,
    FitError,
    FitMode,
    FitReport,
    Trace,
    analyze_trace,
    decompose,
    fit_altitude_model,
    fit_gaussian,
    fit_mle,
    local_mean,
    select_distribution,
)
from .synthesis import FlightConfig, LinkBudget, received_power, synthesize_flight
from .presets import PRESETS, ChannelPreset, get_preset
