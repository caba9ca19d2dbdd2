"""Experiment-layout modeling and loophole verdicts.

A config describes one source and two wings; each wing relays its detector
reading through a pure-delay channel into a mass-amplifying apparatus (or a
human observer) at a fixed station. The essential verdict asks whether the two
collapse windows are spacelike separated; the extended verdict additionally
requires the whole detector-to-collapse region of each wing to be spacelike
from the other's.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .collapse import ApparatusSpec, ModelPreset, apparatus_tau, model_preset
from .errors import ModelError
from .spacetime import (
    CausalKind,
    GeoPoint,
    PhysicalConstants,
    SpacetimeEvent,
    StationWindow,
    Vec3,
    causal_class,
    geo_to_event,
    windows_spacelike,
)


@dataclass(frozen=True)
class DeviceObserver:
    """Mass-displacing apparatus; actuation_time is the engineered lag between
    signal input and the superposition being fully established."""

    apparatus: ApparatusSpec
    actuation_time: float = 0.0

    def __post_init__(self) -> None:
        if self.actuation_time < 0:
            raise ValueError("actuation_time must be >= 0")


@dataclass(frozen=True)
class HumanObserver:
    """Conscious observer; collapse is complete by the end of perception."""

    perception_time: float

    def __post_init__(self) -> None:
        if not self.perception_time > 0:
            raise ValueError("perception_time must be > 0")


Observer = DeviceObserver | HumanObserver


@dataclass(frozen=True)
class WingSpec:
    detector_event: SpacetimeEvent
    channel_delay: float                 # s, pure delay detector -> amplifier
    amplifier_pos: Vec3 | GeoPoint
    observer: Observer
    added_sync_delay: float = 0.0        # s, inserted synchronization buffer

    def __post_init__(self) -> None:
        if self.channel_delay < 0 or self.added_sync_delay < 0:
            raise ValueError("delays must be >= 0")
        if not isinstance(self.amplifier_pos, GeoPoint):
            object.__setattr__(self, "amplifier_pos",
                               tuple(float(v) for v in self.amplifier_pos))


def resolve_amplifier_pos(w: WingSpec, k: PhysicalConstants) -> Vec3:
    if isinstance(w.amplifier_pos, GeoPoint):
        return geo_to_event(w.amplifier_pos, 0.0, k).pos
    return w.amplifier_pos


@dataclass(frozen=True)
class ExperimentConfig:
    source_event: SpacetimeEvent
    wing_l: WingSpec
    wing_r: WingSpec
    settings: "SettingsSpec"
    constants: PhysicalConstants = PhysicalConstants()
    sync_tolerance: float = 1e-6   # s, simultaneity tolerance reported for inputs

    def __post_init__(self) -> None:
        for name, wing in (("wing_l", self.wing_l), ("wing_r", self.wing_r)):
            rel = causal_class(self.source_event, wing.detector_event, self.constants)
            if rel.kind is CausalKind.SPACELIKE or wing.detector_event.t < self.source_event.t:
                raise ValueError(
                    f"{name}.detector_event must lie in or on the future light cone of the source")


@dataclass(frozen=True)
class LoopholeVerdict:
    model: str
    essential_closed: bool
    extended_closed: bool
    essential_margin: float           # s
    extended_margin: float            # s
    collapse_windows: tuple[StationWindow, StationWindow]
    tau_values: tuple[float, float]   # s per wing

    def __post_init__(self) -> None:
        if self.essential_closed != (self.essential_margin > 0):
            raise ValueError("essential_closed must equal essential_margin > 0")


@dataclass(frozen=True)
class DiscriminationReport:
    essential_closed: bool
    predicted_s_qm: float
    predicted_s_causal: float
    gap: float


def amplifier_input_event(w: WingSpec, k: PhysicalConstants = PhysicalConstants()) -> SpacetimeEvent:
    """Signal arrival at the amplifier: detector time plus channel and sync delays."""
    t = w.detector_event.t + w.channel_delay + w.added_sync_delay
    return SpacetimeEvent(t, resolve_amplifier_pos(w, k))


def wing_tau(w: WingSpec, model: ModelPreset, k: PhysicalConstants = PhysicalConstants()) -> float:
    """Collapse-time scale governing the wing: the model estimate for a device,
    the perception time for a human observer (any model)."""
    if isinstance(w.observer, HumanObserver):
        return w.observer.perception_time
    return apparatus_tau(w.observer.apparatus, model, k).tau


def wing_actuation(w: WingSpec) -> float:
    return w.observer.actuation_time if isinstance(w.observer, DeviceObserver) else 0.0


def collapse_window(w: WingSpec, model: ModelPreset, safety_k: float = 1.0,
                    k: PhysicalConstants = PhysicalConstants()) -> StationWindow:
    """Station window containing the wing's collapse: from amplifier input to
    input + actuation + safety_k * tau."""
    if safety_k <= 0:
        raise ValueError("safety_k must be > 0")
    tau = wing_tau(w, model, k)
    if math.isinf(tau):
        raise ModelError(f"model {model.name} predicts no collapse at this apparatus")
    start = amplifier_input_event(w, k)
    return StationWindow(start.pos, start.t, start.t + wing_actuation(w) + safety_k * tau)


def verdict(config: ExperimentConfig, model: ModelPreset | str,
            safety_k: float = 1.0) -> LoopholeVerdict:
    """Essential and extended loophole verdicts for a config under one model."""
    if isinstance(model, str):
        model = model_preset(model)
    k = config.constants
    win_l = collapse_window(config.wing_l, model, safety_k, k)
    win_r = collapse_window(config.wing_r, model, safety_k, k)
    essential = windows_spacelike(win_l, win_r, k)

    # Extended region R'_X: conservative hull over the detector event and the
    # collapse window of wing X; every cross-wing pairing must be spacelike.
    def instant(e: SpacetimeEvent) -> StationWindow:
        return StationWindow(e.pos, e.t, e.t)

    det_l = instant(config.wing_l.detector_event)
    det_r = instant(config.wing_r.detector_event)
    ext_margin = min(
        windows_spacelike(a, b, k).margin
        for a in (det_l, win_l) for b in (det_r, win_r))

    return LoopholeVerdict(
        model=model.name,
        essential_closed=essential.spacelike,
        extended_closed=ext_margin > 0,
        essential_margin=essential.margin,
        extended_margin=ext_margin,
        collapse_windows=(win_l, win_r),
        tau_values=(wing_tau(config.wing_l, model, k), wing_tau(config.wing_r, model, k)),
    )


def max_collapse_window(config: ExperimentConfig) -> float:
    """Largest window duration T such that windows of length T starting at the
    two amplifier-input events stay spacelike: D/c - |dt_inputs|, floored at 0."""
    k = config.constants
    in_l = amplifier_input_event(config.wing_l, k)
    in_r = amplifier_input_event(config.wing_r, k)
    d = math.dist(in_l.pos, in_r.pos)
    return max(d / k.c - abs(in_l.t - in_r.t), 0.0)


def sync_delays(config: ExperimentConfig) -> tuple[float, float]:
    """Minimal non-negative buffers making the amplifier inputs simultaneous
    (computed from detector + channel times, ignoring any existing buffers)."""
    raw_l = config.wing_l.detector_event.t + config.wing_l.channel_delay
    raw_r = config.wing_r.detector_event.t + config.wing_r.channel_delay
    latest = max(raw_l, raw_r)
    return latest - raw_l, latest - raw_r


def margin_factor(config: ExperimentConfig, model: ModelPreset | str,
                  safety_k: float = 1.0) -> float:
    """Largest factor by which both collapse-window durations can be stretched
    while the essential verdict stays closed (1 exactly at the boundary).

    Raises ModelError when the verdict is already open (factor below 1).
    """
    if isinstance(model, str):
        model = model_preset(model)
    k = config.constants
    win_l = collapse_window(config.wing_l, model, safety_k, k)
    win_r = collapse_window(config.wing_r, model, safety_k, k)
    d = math.dist(win_l.pos, win_r.pos)
    horizon = d / k.c
    dt = win_l.t_start - win_r.t_start
    if abs(dt) >= horizon:
        raise ModelError("essential verdict open: window starts are not spacelike")
    limits = []
    for dur, offset in ((win_l.duration, dt), (win_r.duration, -dt)):
        if dur > 0:
            limits.append((horizon - offset) / dur)
    factor = min(limits) if limits else math.inf
    if factor < 1.0:
        raise ModelError("essential verdict open: no positive margin to scale")
    return factor


def improvement_factor(c1: ExperimentConfig, c2: ExperimentConfig) -> float:
    """Ratio of max_collapse_window values (c1 over c2)."""
    denom = max_collapse_window(c2)
    if denom == 0.0:
        raise ValueError("reference config has zero collapse-window budget")
    return max_collapse_window(c1) / denom


def required_altitude(perception_time: float,
                      k: PhysicalConstants = PhysicalConstants()) -> float:
    """Altitude above the surface needed so an observer antipodal to a ground
    observer has light-travel separation of at least c * perception_time."""
    if not perception_time > 0:
        raise ValueError("perception_time must be > 0")
    return max(k.c * perception_time - k.earth_diameter, 0.0)


CHSH_QM = 2.0 * math.sqrt(2.0)
CHSH_LHV = 2.0


def discriminates(config: ExperimentConfig, model: ModelPreset | str,
                  safety_k: float = 1.0) -> DiscriminationReport:
    """Predicted CHSH value gap between standard quantum theory and a
    causal-collapse model on this design (at the optimal angles).

    A closed essential verdict forces the collapse pair spacelike, pinning the
    causal model at the local bound 2; an open design lets causally ordered
    collapses reproduce quantum statistics, and the experiment cannot tell
    the two apart.
    """
    v = verdict(config, model, safety_k)
    s_causal = CHSH_LHV if v.essential_closed else CHSH_QM
    return DiscriminationReport(
        essential_closed=v.essential_closed,
        predicted_s_qm=CHSH_QM,
        predicted_s_causal=s_causal,
        gap=CHSH_QM - s_causal,
    )


# --------------------------------------------------------------------------
# Scenario library.
# --------------------------------------------------------------------------

# Benchmark amplifier: 2 mg mirror, 3 x 2 x 0.15 mm, displaced >= 12.6 nm along
# its thickness within ~6 us. The attached (piezo) mass is backed out of the
# published GRW benchmark time of 2e-4 s at lambda=1e-16/s, a=1e-7 m: solving
# the rate formula gives N = 5.039e22 nucleons total, i.e. ~8.2e-5 kg of
# actuator co-moving with the mirror. That inference is flagged in reports.
GRW_BENCHMARK_TAU = 2.0e-4
CSL_QUOTED_SALART_TAU = 1.0e-8  # commonly quoted value for this setup; the
                                # direct sliver evaluation is ~4.7e-11 s.


def _salart_apparatus(k: PhysicalConstants) -> ApparatusSpec:
    lam, a = 1e-16, 1e-7
    d = 12.6e-9
    n_total = 16.0 * a * a / (lam * GRW_BENCHMARK_TAU * d * d)
    total_mass = n_total * k.nucleon_mass
    mirror_mass = 2e-6
    return ApparatusSpec(
        mirror_mass=mirror_mass,
        mirror_dims=(3e-3, 2e-3, 1.5e-4),
        displacement_d=d,
        displacement_axis=2,
        attached_mass=total_mass - mirror_mass,
    )


SALART_ACTUATION = 6e-6      # s, signal input to full mirror displacement
SALART_SEPARATION_TIME = 6e-5  # s, wing separation / c


def is_salart_benchmark(spec: ApparatusSpec) -> bool:
    ref = _salart_apparatus(PhysicalConstants())
    return (math.isclose(spec.mirror_mass, ref.mirror_mass, rel_tol=1e-6)
            and spec.mirror_dims == ref.mirror_dims
            and math.isclose(spec.displacement_d, ref.displacement_d, rel_tol=1e-6))


def _optimal_settings():
    from .bell import SettingsSpec
    return SettingsSpec((0.0, math.pi / 2), (math.pi / 4, 3 * math.pi / 4))


def salart2008(constants: PhysicalConstants = PhysicalConstants()) -> ExperimentConfig:
    """Two wings separated by 60 us x c, signals driven straight into co-sited
    piezo amplifiers (no channel, no buffering)."""
    half = constants.c * SALART_SEPARATION_TIME / 2.0
    t_arrive = SALART_SEPARATION_TIME / 2.0
    apparatus = _salart_apparatus(constants)
    wings = []
    for x in (half, -half):
        pos = (x, 0.0, 0.0)
        wings.append(WingSpec(
            detector_event=SpacetimeEvent(t_arrive, pos),
            channel_delay=0.0,
            amplifier_pos=pos,
            observer=DeviceObserver(apparatus, SALART_ACTUATION),
        ))
    return ExperimentConfig(
        source_event=SpacetimeEvent(0.0, (0.0, 0.0, 0.0)),
        wing_l=wings[0],
        wing_r=wings[1],
        settings=_optimal_settings(),
        constants=constants,
    )


def antipodal_terrestrial(constants: PhysicalConstants = PhysicalConstants(),
                          channel_delay: float = 0.06) -> ExperimentConfig:
    """Nearly adjacent detectors whose readings travel to antipodal surface
    amplifiers over symmetric fiber delays, arriving simultaneously."""
    r = constants.earth_radius
    apparatus = _salart_apparatus(constants)
    det_sep = 0.5  # m from the source, on either side
    t_arrive = det_sep / constants.c
    wing_l = WingSpec(
        detector_event=SpacetimeEvent(t_arrive, (r, det_sep, 0.0)),
        channel_delay=channel_delay,
        amplifier_pos=GeoPoint(0.0, 0.0),
        observer=DeviceObserver(apparatus, SALART_ACTUATION),
    )
    wing_r = WingSpec(
        detector_event=SpacetimeEvent(t_arrive, (r, -det_sep, 0.0)),
        channel_delay=channel_delay,
        amplifier_pos=GeoPoint(0.0, math.pi),
        observer=DeviceObserver(apparatus, SALART_ACTUATION),
    )
    return ExperimentConfig(
        source_event=SpacetimeEvent(0.0, (r, 0.0, 0.0)),
        wing_l=wing_l,
        wing_r=wing_r,
        settings=_optimal_settings(),
        constants=constants,
    )


def space_human(constants: PhysicalConstants = PhysicalConstants(),
                observer_altitude: float = 2.0e7,
                perception_time: float = 0.1) -> ExperimentConfig:
    """Ground observer antipodal to an orbiting observer; both wings are human
    observers fed over synchronized channels from adjacent ground detectors."""
    if observer_altitude < 0:
        raise ValueError("observer_altitude must be >= 0")
    r = constants.earth_radius
    det_sep = 0.5
    t_arrive = det_sep / constants.c
    # Symmetric channel delay comfortably above both light times, so the relay
    # is physical and the inputs are simultaneous without extra buffering.
    lt_space = (observer_altitude) / constants.c
    lt_ground = constants.earth_diameter / constants.c
    delay = 1.25 * max(lt_space, lt_ground)
    wing_l = WingSpec(
        detector_event=SpacetimeEvent(t_arrive, (r, det_sep, 0.0)),
        channel_delay=delay,
        amplifier_pos=GeoPoint(0.0, 0.0, observer_altitude),
        observer=HumanObserver(perception_time),
    )
    wing_r = WingSpec(
        detector_event=SpacetimeEvent(t_arrive, (r, -det_sep, 0.0)),
        channel_delay=delay,
        amplifier_pos=GeoPoint(0.0, math.pi),
        observer=HumanObserver(perception_time),
    )
    return ExperimentConfig(
        source_event=SpacetimeEvent(0.0, (r, 0.0, 0.0)),
        wing_l=wing_l,
        wing_r=wing_r,
        settings=_optimal_settings(),
        constants=constants,
    )


SCENARIO_BUILDERS = {
    "salart2008": salart2008,
    "antipodal_terrestrial": antipodal_terrestrial,
    "space_human": space_human,
}

SCENARIO_PARAM_KEYS = {
    "salart2008": set(),
    "antipodal_terrestrial": {"channel_delay_s"},
    "space_human": {"observer_altitude_m", "perception_s"},
}


def scenario_names() -> list[str]:
    return list(SCENARIO_BUILDERS)


def build_scenario(name: str, constants: PhysicalConstants = PhysicalConstants(),
                   **params) -> ExperimentConfig:
    if name not in SCENARIO_BUILDERS:
        known = ", ".join(scenario_names())
        raise ValueError(f"unknown scenario {name!r} (known: {known})")
    if name == "antipodal_terrestrial":
        kwargs = {}
        if "channel_delay_s" in params:
            kwargs["channel_delay"] = params.pop("channel_delay_s")
        cfg = antipodal_terrestrial(constants, **kwargs)
    elif name == "space_human":
        kwargs = {}
        if "observer_altitude_m" in params:
            kwargs["observer_altitude"] = params.pop("observer_altitude_m")
        if "perception_s" in params:
            kwargs["perception_time"] = params.pop("perception_s")
        cfg = space_human(constants, **kwargs)
    else:
        cfg = salart2008(constants)
    if params:
        raise ValueError(f"unknown scenario parameters for {name}: {sorted(params)}")
    return cfg
