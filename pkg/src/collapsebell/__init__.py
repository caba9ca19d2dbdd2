"""Design verification and Monte Carlo simulation of Bell experiments under
localized-collapse hypotheses: collapse-time estimates (CSL, GRW, gravitational),
spacelike-separation verdicts for candidate geometries, and trial-level
simulation of standard quantum statistics against a causal-collapse local model.
"""

__version__ = "0.1.0"

from .spacetime import (  # noqa: F401
    CausalClass,
    CausalKind,
    CausalOrder,
    GeoPoint,
    PhysicalConstants,
    SpacetimeEvent,
    StationWindow,
    causal_class,
    chord_distance,
    geo_to_event,
    light_time,
    squared_interval,
    windows_spacelike,
)
from .collapse import (  # noqa: F401
    ApparatusSpec,
    CollapseEstimate,
    CollapseParams,
    MassDistribution,
    MODEL_PRESETS,
    apparatus_tau,
    csl_tau,
    dp_self_energy,
    dp_tau,
    grw_effective_displacement,
    grw_tau,
    model_preset,
    nucleon_count,
    sliver_nucleons,
    superposition_pair,
)
from .design import (  # noqa: F401
    DeviceObserver,
    ExperimentConfig,
    HumanObserver,
    LoopholeVerdict,
    WingSpec,
    amplifier_input_event,
    build_scenario,
    collapse_window,
    discriminates,
    improvement_factor,
    margin_factor,
    max_collapse_window,
    required_altitude,
    scenario_names,
    sync_delays,
    verdict,
)
from .bell import (  # noqa: F401
    ChshResult,
    HiddenVariable,
    SettingsSpec,
    TrialRecord,
    azuma_p_bound,
    chsh_closed_form,
    chsh_estimate,
    chsh_optimal_settings,
    correlation_closed_form,
    lhv_outcome,
    qm_joint_prob,
    run_trials,
    write_csv,
)
from .errors import ConfigError, ModelError  # noqa: F401
from .shell import cli, emit_report, parse_config  # noqa: F401
