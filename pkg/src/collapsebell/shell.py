"""Scenario-config parsing, canonical report emission, and the CLI.

Configs and reports are JSON. Every numeric key carries its SI unit as a
suffix (``_s``, ``_m``, ``_kg``, ``_rad``); values are bare numbers, never
unit strings. Reports are canonical: sorted keys, scientific floats with six
significant digits, newline-terminated, byte-stable for identical inputs.
Config documents round-trip at full float precision.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
from dataclasses import dataclass, replace
from pathlib import Path

from . import __version__, bell, design
from .bell import SettingsSpec, chsh_estimate, run_trials, write_csv
from .collapse import (
    MODEL_PRESETS,
    ApparatusSpec,
    apparatus_tau,
    grw_effective_displacement,
    model_preset,
    sliver_nucleons,
)
from .design import (
    CSL_QUOTED_SALART_TAU,
    DeviceObserver,
    ExperimentConfig,
    HumanObserver,
    WingSpec,
    amplifier_input_event,
    build_scenario,
    is_salart_benchmark,
    margin_factor,
    max_collapse_window,
    scenario_names,
    sync_delays,
    verdict as design_verdict,
    discriminates,
)
from .errors import ConfigError, ModelError
from .spacetime import GeoPoint, PhysicalConstants, SpacetimeEvent

ENGINE_ALIASES = {"qm": "standard_qm", "causal": "causal_collapse"}
DEFAULT_SIMULATION_MODEL = "dp-diosi"
MAX_TRIALS = 2**31


@dataclass(frozen=True)
class ConfigDocument:
    """Validated scenario document: the expanded experiment plus run options."""

    scenario: str
    experiment: ExperimentConfig
    model: str
    engine: str | None = None
    trials: int | None = None
    seed: int | None = None
    safety_k: float = 1.0


# --------------------------------------------------------------------------
# Validation helpers. All failures raise ConfigError with a key path.
# --------------------------------------------------------------------------

def _is_number(v) -> bool:
    return isinstance(v, (int, float)) and not isinstance(v, bool)


def _expect_object(v, path: str) -> dict:
    if not isinstance(v, dict):
        raise ConfigError(f"{path}: expected an object")
    return v


def _expect_number(v, path: str, minimum: float | None = None,
                   exclusive_minimum: float | None = None) -> float:
    if isinstance(v, str):
        raise ConfigError(f"{path}: expected a bare SI number, not a string")
    if not _is_number(v) or not math.isfinite(v):
        raise ConfigError(f"{path}: expected a finite number")
    v = float(v)
    if minimum is not None and v < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}")
    if exclusive_minimum is not None and v <= exclusive_minimum:
        raise ConfigError(f"{path}: must be > {exclusive_minimum}")
    return v


def _expect_int(v, path: str, minimum: int | None = None, maximum: int | None = None) -> int:
    if not isinstance(v, int) or isinstance(v, bool):
        raise ConfigError(f"{path}: expected an integer")
    if minimum is not None and v < minimum:
        raise ConfigError(f"{path}: must be >= {minimum}")
    if maximum is not None and v > maximum:
        raise ConfigError(f"{path}: must be <= {maximum}")
    return v


def _expect_str(v, path: str) -> str:
    if not isinstance(v, str):
        raise ConfigError(f"{path}: expected a string")
    return v


def _expect_vec3(v, path: str) -> tuple[float, float, float]:
    if not isinstance(v, list) or len(v) != 3:
        raise ConfigError(f"{path}: expected a 3-element array")
    return tuple(_expect_number(x, f"{path}[{i}]") for i, x in enumerate(v))


def _expect_pair(v, path: str) -> tuple[float, float]:
    if not isinstance(v, list) or len(v) != 2:
        raise ConfigError(f"{path}: expected a 2-element array")
    return tuple(_expect_number(x, f"{path}[{i}]") for i, x in enumerate(v))


def _check_keys(obj: dict, path: str, required: set[str], optional: set[str]) -> None:
    for key in obj:
        if not isinstance(key, str) or key not in required | optional:
            raise ConfigError(f"{path}.{key}: unknown key")
    for key in required:
        if key not in obj:
            raise ConfigError(f"{path}.{key}: missing required key")


def _wrap(value, err: Exception, path: str):
    raise ConfigError(f"{path}: {err}") from None


# --------------------------------------------------------------------------
# Parsing.
# --------------------------------------------------------------------------

_CONSTANT_KEYS = {
    "c_m_per_s": "c",
    "hbar_j_s": "hbar",
    "g_m3_per_kg_s2": "G",
    "nucleon_mass_kg": "nucleon_mass",
    "earth_diameter_m": "earth_diameter",
}

_TOP_KEYS = {"scenario", "experiment", "model", "engine", "trials", "seed",
             "safety_k", "sync_tolerance_s", "constants",
             "channel_delay_s", "observer_altitude_m", "perception_s"}


def _parse_constants(obj, path: str) -> PhysicalConstants:
    obj = _expect_object(obj, path)
    _check_keys(obj, path, set(), set(_CONSTANT_KEYS))
    kwargs = {}
    for key, field_name in _CONSTANT_KEYS.items():
        if key in obj:
            kwargs[field_name] = _expect_number(obj[key], f"{path}.{key}", exclusive_minimum=0.0)
    try:
        return PhysicalConstants(**kwargs)
    except ValueError as e:
        _wrap(obj, e, path)


def _parse_event(obj, path: str) -> SpacetimeEvent:
    obj = _expect_object(obj, path)
    _check_keys(obj, path, {"t_s", "pos_m"}, set())
    t = _expect_number(obj["t_s"], f"{path}.t_s")
    pos = _expect_vec3(obj["pos_m"], f"{path}.pos_m")
    return SpacetimeEvent(t, pos)


def _parse_apparatus(obj, path: str) -> ApparatusSpec:
    obj = _expect_object(obj, path)
    _check_keys(obj, path, {"mirror_mass_kg", "mirror_dims_m", "displacement_m"},
                {"displacement_axis", "attached_mass_kg", "density_kg_m3"})
    try:
        return ApparatusSpec(
            mirror_mass=_expect_number(obj["mirror_mass_kg"], f"{path}.mirror_mass_kg", minimum=0.0),
            mirror_dims=_expect_vec3(obj["mirror_dims_m"], f"{path}.mirror_dims_m"),
            displacement_d=_expect_number(obj["displacement_m"], f"{path}.displacement_m", minimum=0.0),
            displacement_axis=_expect_int(obj.get("displacement_axis", 2),
                                          f"{path}.displacement_axis", 0, 2),
            attached_mass=_expect_number(obj.get("attached_mass_kg", 0.0),
                                         f"{path}.attached_mass_kg", minimum=0.0),
            density=(None if "density_kg_m3" not in obj else
                     _expect_number(obj["density_kg_m3"], f"{path}.density_kg_m3",
                                    exclusive_minimum=0.0)),
        )
    except ValueError as e:
        _wrap(obj, e, path)


def _parse_amplifier_pos(obj, path: str):
    obj = _expect_object(obj, path)
    if "geo" in obj:
        _check_keys(obj, path, {"geo"}, set())
        geo = _expect_object(obj["geo"], f"{path}.geo")
        _check_keys(geo, f"{path}.geo", {"lat_rad", "lon_rad"}, {"alt_m"})
        try:
            return GeoPoint(
                latitude=_expect_number(geo["lat_rad"], f"{path}.geo.lat_rad"),
                longitude=_expect_number(geo["lon_rad"], f"{path}.geo.lon_rad"),
                altitude=_expect_number(geo.get("alt_m", 0.0), f"{path}.geo.alt_m", minimum=0.0),
            )
        except ValueError as e:
            _wrap(obj, e, path)
    _check_keys(obj, path, {"pos_m"}, set())
    return _expect_vec3(obj["pos_m"], f"{path}.pos_m")


def _parse_observer(obj, path: str):
    obj = _expect_object(obj, path)
    kind = _expect_str(obj.get("type"), f"{path}.type") if "type" in obj else None
    if kind == "device":
        _check_keys(obj, path, {"type", "apparatus"}, {"actuation_s"})
        return DeviceObserver(
            apparatus=_parse_apparatus(obj["apparatus"], f"{path}.apparatus"),
            actuation_time=_expect_number(obj.get("actuation_s", 0.0),
                                          f"{path}.actuation_s", minimum=0.0),
        )
    if kind == "human":
        _check_keys(obj, path, {"type", "perception_s"}, set())
        return HumanObserver(
            perception_time=_expect_number(obj["perception_s"], f"{path}.perception_s",
                                           exclusive_minimum=0.0))
    raise ConfigError(f"{path}.type: expected 'device' or 'human'")


def _parse_wing(obj, path: str) -> WingSpec:
    obj = _expect_object(obj, path)
    _check_keys(obj, path, {"detector_event", "amplifier_pos", "observer"},
                {"channel_delay_s", "added_sync_delay_s"})
    try:
        return WingSpec(
            detector_event=_parse_event(obj["detector_event"], f"{path}.detector_event"),
            channel_delay=_expect_number(obj.get("channel_delay_s", 0.0),
                                         f"{path}.channel_delay_s", minimum=0.0),
            amplifier_pos=_parse_amplifier_pos(obj["amplifier_pos"], f"{path}.amplifier_pos"),
            observer=_parse_observer(obj["observer"], f"{path}.observer"),
            added_sync_delay=_expect_number(obj.get("added_sync_delay_s", 0.0),
                                            f"{path}.added_sync_delay_s", minimum=0.0),
        )
    except ValueError as e:
        _wrap(obj, e, path)


def _parse_settings(obj, path: str) -> SettingsSpec:
    obj = _expect_object(obj, path)
    _check_keys(obj, path, {"wing_l_rad", "wing_r_rad"}, set())
    return SettingsSpec(
        wing_l=_expect_pair(obj["wing_l_rad"], f"{path}.wing_l_rad"),
        wing_r=_expect_pair(obj["wing_r_rad"], f"{path}.wing_r_rad"),
    )


def _parse_experiment(obj, path: str, constants: PhysicalConstants,
                      sync_tolerance: float) -> ExperimentConfig:
    obj = _expect_object(obj, path)
    _check_keys(obj, path, {"source_event", "wing_l", "wing_r"}, {"settings"})
    settings = (bell.chsh_optimal_settings() if "settings" not in obj
                else _parse_settings(obj["settings"], f"{path}.settings"))
    try:
        return ExperimentConfig(
            source_event=_parse_event(obj["source_event"], f"{path}.source_event"),
            wing_l=_parse_wing(obj["wing_l"], f"{path}.wing_l"),
            wing_r=_parse_wing(obj["wing_r"], f"{path}.wing_r"),
            settings=settings,
            constants=constants,
            sync_tolerance=sync_tolerance,
        )
    except ValueError as e:
        _wrap(obj, e, path)


def parse_config(text: bytes | str) -> ConfigDocument:
    """Parse and validate a scenario config document.

    Unknown keys are rejected with the offending key path; scenario references
    are expanded against the library; defaults (safety_k = 1, standard
    constants, optimal settings) are applied.
    """
    if isinstance(text, bytes):
        try:
            text = text.decode("utf-8")
        except UnicodeDecodeError as e:
            raise ConfigError(f"config is not valid UTF-8: {e}") from None
    try:
        data = json.loads(text, parse_constant=_reject_constant)
    except json.JSONDecodeError as e:
        raise ConfigError(
            f"config syntax error at line {e.lineno} column {e.colno}: {e.msg}") from None
    except RecursionError:
        raise ConfigError("config nesting too deep") from None

    top = _expect_object(data, "config")
    _check_keys(top, "config", {"scenario", "model"}, _TOP_KEYS - {"scenario", "model"})
    scenario = _expect_str(top["scenario"], "config.scenario")

    constants = (_parse_constants(top["constants"], "config.constants")
                 if "constants" in top else PhysicalConstants())
    sync_tolerance = _expect_number(top.get("sync_tolerance_s", 1e-6),
                                    "config.sync_tolerance_s", minimum=0.0)

    scenario_params = {key: top[key]
                       for key in ("channel_delay_s", "observer_altitude_m", "perception_s")
                       if key in top}

    if "experiment" in top:
        if scenario_params:
            bad = sorted(scenario_params)
            raise ConfigError(
                f"config.{bad[0]}: scenario parameters cannot be combined with an inline experiment")
        experiment = _parse_experiment(top["experiment"], "config.experiment",
                                       constants, sync_tolerance)
        if scenario != "custom" and scenario not in scenario_names():
            raise ConfigError(f"config.scenario: unknown scenario {scenario!r}")
    else:
        if scenario not in scenario_names():
            raise ConfigError(
                f"config.scenario: unknown scenario {scenario!r}; "
                f"known: {', '.join(scenario_names())} (or 'custom' with an inline experiment)")
        allowed = design.SCENARIO_PARAM_KEYS[scenario]
        for key in scenario_params:
            if key not in allowed:
                raise ConfigError(f"config.{key}: not a parameter of scenario {scenario!r}")
        checked = {}
        if "channel_delay_s" in scenario_params:
            checked["channel_delay_s"] = _expect_number(
                scenario_params["channel_delay_s"], "config.channel_delay_s", minimum=0.0)
        if "observer_altitude_m" in scenario_params:
            checked["observer_altitude_m"] = _expect_number(
                scenario_params["observer_altitude_m"], "config.observer_altitude_m", minimum=0.0)
        if "perception_s" in scenario_params:
            checked["perception_s"] = _expect_number(
                scenario_params["perception_s"], "config.perception_s", exclusive_minimum=0.0)
        try:
            experiment = build_scenario(scenario, constants, **checked)
        except ValueError as e:
            _wrap(top, e, "config.scenario")
        experiment = replace(experiment, sync_tolerance=sync_tolerance)

    if "model" not in top:
        raise ConfigError("config.model: missing required key")
    model = _expect_str(top["model"], "config.model")
    if model not in MODEL_PRESETS:
        raise ConfigError(
            f"config.model: unknown model {model!r}; known: {', '.join(sorted(MODEL_PRESETS))}")
    engine = None
    if "engine" in top:
        engine = _expect_str(top["engine"], "config.engine")
        if engine not in ENGINE_ALIASES:
            raise ConfigError("config.engine: expected 'qm' or 'causal'")
    trials = _expect_int(top["trials"], "config.trials", 1, MAX_TRIALS) if "trials" in top else None
    seed = _expect_int(top["seed"], "config.seed", 0, 2**64 - 1) if "seed" in top else None
    safety_k = _expect_number(top.get("safety_k", 1.0), "config.safety_k", exclusive_minimum=0.0)

    return ConfigDocument(scenario=scenario, experiment=experiment, model=model,
                          engine=engine, trials=trials, seed=seed, safety_k=safety_k)


def _reject_constant(name: str):
    raise ConfigError(f"non-finite JSON number {name!r} not allowed")


# --------------------------------------------------------------------------
# Canonical emission.
# --------------------------------------------------------------------------

def _format_float(x: float, digits: int | None) -> str:
    if math.isnan(x):
        raise ValueError("cannot serialize NaN")
    if math.isinf(x):
        return '"infinity"' if x > 0 else '"-infinity"'
    if x == 0.0:
        x = 0.0  # normalize -0.0
    if digits is None:
        return repr(float(x))
    return format(float(x), f".{digits - 1}e")


def canonical_json(obj, digits: int | None = 6) -> str:
    """Deterministic JSON: sorted keys, fixed float format, no whitespace."""
    if obj is None:
        return "null"
    if isinstance(obj, bool):
        return "true" if obj else "false"
    if isinstance(obj, int):
        return str(obj)
    if isinstance(obj, float):
        return _format_float(obj, digits)
    if isinstance(obj, str):
        return json.dumps(obj, ensure_ascii=False)
    if isinstance(obj, dict):
        items = sorted(obj.items())
        inner = ",".join(f"{json.dumps(k, ensure_ascii=False)}:{canonical_json(v, digits)}"
                         for k, v in items)
        return "{" + inner + "}"
    if isinstance(obj, (list, tuple)):
        return "[" + ",".join(canonical_json(v, digits) for v in obj) + "]"
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def emit_report(report: dict) -> bytes:
    """Canonical report bytes: sorted keys, 6-significant-digit floats, newline."""
    return (canonical_json(report, digits=6) + "\n").encode("utf-8")


def emit_config_document(doc: ConfigDocument) -> bytes:
    """Full-precision canonical config bytes; parse(emit(doc)) equals doc."""
    return (canonical_json(document_to_dict(doc), digits=None) + "\n").encode("utf-8")


def _event_dict(e: SpacetimeEvent) -> dict:
    return {"t_s": e.t, "pos_m": list(e.pos)}


def _apparatus_dict(a: ApparatusSpec) -> dict:
    out = {
        "mirror_mass_kg": a.mirror_mass,
        "mirror_dims_m": list(a.mirror_dims),
        "displacement_m": a.displacement_d,
        "displacement_axis": a.displacement_axis,
        "attached_mass_kg": a.attached_mass,
    }
    if a.density is not None:
        out["density_kg_m3"] = a.density
    return out


def _wing_dict(w: WingSpec) -> dict:
    if isinstance(w.amplifier_pos, GeoPoint):
        amp = {"geo": {"lat_rad": w.amplifier_pos.latitude,
                       "lon_rad": w.amplifier_pos.longitude,
                       "alt_m": w.amplifier_pos.altitude}}
    else:
        amp = {"pos_m": list(w.amplifier_pos)}
    if isinstance(w.observer, HumanObserver):
        obs = {"type": "human", "perception_s": w.observer.perception_time}
    else:
        obs = {"type": "device", "apparatus": _apparatus_dict(w.observer.apparatus),
               "actuation_s": w.observer.actuation_time}
    return {
        "detector_event": _event_dict(w.detector_event),
        "channel_delay_s": w.channel_delay,
        "added_sync_delay_s": w.added_sync_delay,
        "amplifier_pos": amp,
        "observer": obs,
    }


def document_to_dict(doc: ConfigDocument) -> dict:
    exp = doc.experiment
    out = {
        "scenario": doc.scenario,
        "experiment": {
            "source_event": _event_dict(exp.source_event),
            "wing_l": _wing_dict(exp.wing_l),
            "wing_r": _wing_dict(exp.wing_r),
            "settings": {"wing_l_rad": list(exp.settings.wing_l),
                         "wing_r_rad": list(exp.settings.wing_r)},
        },
        "constants": {
            "c_m_per_s": exp.constants.c,
            "hbar_j_s": exp.constants.hbar,
            "g_m3_per_kg_s2": exp.constants.G,
            "nucleon_mass_kg": exp.constants.nucleon_mass,
            "earth_diameter_m": exp.constants.earth_diameter,
        },
        "sync_tolerance_s": exp.sync_tolerance,
        "safety_k": doc.safety_k,
    }
    out["model"] = doc.model
    for key in ("engine", "trials", "seed"):
        value = getattr(doc, key)
        if value is not None:
            out[key] = value
    return out


# --------------------------------------------------------------------------
# Report assembly.
# --------------------------------------------------------------------------

def _window_dict(w) -> dict:
    return {"pos_m": list(w.pos), "t_start_s": w.t_start, "t_end_s": w.t_end}


def _provenance(doc_bytes: bytes) -> dict:
    return {
        "tool": "collapsebell",
        "tool_version": __version__,
        "input_sha256": hashlib.sha256(doc_bytes).hexdigest(),
    }


def build_analyze_report(doc: ConfigDocument, doc_bytes: bytes,
                         models: list[str], safety_k: float) -> dict:
    exp = doc.experiment
    k = exp.constants
    in_l = amplifier_input_event(exp.wing_l, k)
    in_r = amplifier_input_event(exp.wing_r, k)
    sep = math.dist(in_l.pos, in_r.pos)
    notes: list[dict] = []
    verdicts = []
    for name in models:
        preset = model_preset(name)
        v = design_verdict(exp, preset, safety_k)
        try:
            factor = margin_factor(exp, preset, safety_k)
        except ModelError:
            factor = None
        disc = discriminates(exp, preset, safety_k)
        entry = {
            "model": name,
            "essential_closed": v.essential_closed,
            "extended_closed": v.extended_closed,
            "essential_margin_s": v.essential_margin,
            "extended_margin_s": v.extended_margin,
            "tau_l_s": v.tau_values[0],
            "tau_r_s": v.tau_values[1],
            "window_l": _window_dict(v.collapse_windows[0]),
            "window_r": _window_dict(v.collapse_windows[1]),
            "margin_factor": factor,
            "discriminates": {
                "predicted_s_qm": disc.predicted_s_qm,
                "predicted_s_causal": disc.predicted_s_causal,
                "gap": disc.gap,
            },
        }
        verdicts.append(entry)
        notes.extend(_model_notes(exp, preset, v))
    report = _provenance(doc_bytes)
    report.update({
        "scenario": doc.scenario,
        "safety_k": safety_k,
        "geometry": {
            "amplifier_separation_m": sep,
            "max_collapse_window_s": max_collapse_window(exp),
            "amplifier_input_times_s": [in_l.t, in_r.t],
            "inputs_simultaneous": abs(in_l.t - in_r.t) <= exp.sync_tolerance,
            "suggested_sync_delays_s": list(sync_delays(exp)),
        },
        "verdicts": verdicts,
        "notes": notes,
    })
    return report


def _model_notes(exp: ExperimentConfig, preset, v) -> list[dict]:
    notes = []
    for wing_name, wing in (("wing_l", exp.wing_l), ("wing_r", exp.wing_r)):
        if not isinstance(wing.observer, DeviceObserver):
            continue
        spec = wing.observer.apparatus
        if not is_salart_benchmark(spec):
            continue
        if preset.kind == "csl":
            tau = apparatus_tau(spec, preset, exp.constants).tau
            notes.append({
                "kind": "csl-sliver-vs-quoted",
                "wing": wing_name,
                "model": preset.name,
                "computed_tau_s": tau,
                "quoted_tau_s": CSL_QUOTED_SALART_TAU,
                "note": ("direct sliver-count evaluation of the CSL rate for this amplifier "
                         "gives computed_tau_s; the commonly quoted figure for the same setup "
                         "is quoted_tau_s. The mapping of nucleon count and area behind the "
                         "quoted figure is convention-dependent; both values are reported, "
                         "neither is reconciled away."),
            })
        if preset.kind == "grw":
            notes.append({
                "kind": "grw-derived-attached-mass",
                "wing": wing_name,
                "model": preset.name,
                "attached_mass_kg": spec.attached_mass,
                "note": ("the attached actuator mass is not independently measured; it is "
                         "inferred by matching the published benchmark collapse time of "
                         "2e-4 s at the standard rate parameters."),
            })
        break  # both wings share the benchmark amplifier; one note is enough
    return notes


def build_simulate_report(doc: ConfigDocument, doc_bytes: bytes, engine_alias: str,
                          model: str, trials: int, seed: int, result,
                          log) -> dict:
    report = _provenance(doc_bytes)
    report.update({
        "scenario": doc.scenario,
        "engine": engine_alias,
        "model": model,
        "trials": trials,
        "seed": seed,
        "s_hat": result.s_hat,
        "s_abs": result.s_abs,
        "correlations": {"e11": result.e11, "e12": result.e12,
                         "e21": result.e21, "e22": result.e22},
        "std_err": result.std_err,
        "p_bound": result.p_bound,
        "class_counts": log.class_counts(),
    })
    return report


def build_collapse_time_report(source: str, spec: ApparatusSpec, models: list[str],
                               constants: PhysicalConstants) -> dict:
    estimates = []
    for name in models:
        preset = model_preset(name)
        est = apparatus_tau(spec, preset, constants)
        if math.isinf(est.tau):
            raise ModelError(f"model {name} predicts no collapse at this apparatus")
        entry = {"model": name, "tau_s": est.tau}
        if preset.kind == "grw":
            d_full, d_half = grw_effective_displacement(spec)
            if d_half > 0:
                ratio = (d_full / d_half) ** 2
                entry["tau_half_displacement_s"] = est.tau * ratio
        if preset.kind == "csl":
            entry["sliver_nucleons"] = sliver_nucleons(spec, constants)
            entry["mirror_area_m2"] = spec.mirror_area
        estimates.append(entry)
    return {
        "tool": "collapsebell",
        "tool_version": __version__,
        "apparatus_source": source,
        "apparatus": _apparatus_dict(spec),
        "estimates": estimates,
    }


# --------------------------------------------------------------------------
# CLI.
# --------------------------------------------------------------------------

class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # noqa: D102 - argparse hook
        raise UsageError(message)


def _load_document(arg: str) -> tuple[ConfigDocument, bytes]:
    """Config argument: a library scenario name or a path to a JSON document."""
    if arg in scenario_names():
        raw = json.dumps({"scenario": arg, "model": DEFAULT_SIMULATION_MODEL}).encode("utf-8")
        return parse_config(raw), raw
    path = Path(arg)
    if not path.is_file():
        raise ConfigError(f"no such scenario or config file: {arg}")
    raw = path.read_bytes()
    return parse_config(raw), raw


def _cmd_analyze(args) -> int:
    doc, raw = _load_document(args.config)
    models = args.model if args.model else [doc.model]
    for name in models:
        if name not in MODEL_PRESETS:
            raise ConfigError(
                f"unknown model {name!r}; known: {', '.join(sorted(MODEL_PRESETS))}")
    safety_k = args.safety_k if args.safety_k is not None else doc.safety_k
    if safety_k <= 0:
        raise UsageError("--safety-k must be > 0")
    report = build_analyze_report(doc, raw, models, safety_k)
    sys.stdout.buffer.write(emit_report(report))
    sys.stdout.buffer.flush()
    return 0


def _cmd_simulate(args) -> int:
    doc, raw = _load_document(args.config)
    engine_alias = args.engine or doc.engine
    if engine_alias is None:
        raise UsageError("an engine is required (--engine qm|causal or config key)")
    trials = args.trials if args.trials is not None else doc.trials
    if trials is None:
        raise UsageError("a trial count is required (--trials or config key)")
    if not 1 <= trials <= MAX_TRIALS:
        raise UsageError(f"--trials must be in [1, {MAX_TRIALS}]")
    seed = args.seed if args.seed is not None else doc.seed
    if seed is None:
        raise UsageError("a seed is required (--seed or config key)")
    model = args.model or doc.model
    if model not in MODEL_PRESETS:
        raise ConfigError(f"unknown model {model!r}")
    log = run_trials(doc.experiment, model, ENGINE_ALIASES[engine_alias], trials, seed)
    result = chsh_estimate(log)
    if args.csv:
        write_csv(log, args.csv)
    report = build_simulate_report(doc, raw, engine_alias, model, trials, seed, result, log)
    sys.stdout.buffer.write(emit_report(report))
    sys.stdout.buffer.flush()
    return 0


def _cmd_collapse_time(args) -> int:
    models = args.model or sorted(MODEL_PRESETS)
    for name in models:
        if name not in MODEL_PRESETS:
            raise ConfigError(
                f"unknown model {name!r}; known: {', '.join(sorted(MODEL_PRESETS))}")
    arg = args.apparatus
    if arg in scenario_names():
        doc, _ = _load_document(arg)
        spec = _first_apparatus(doc)
        constants = doc.experiment.constants
    else:
        path = Path(arg)
        if not path.is_file():
            raise ConfigError(f"no such scenario or config file: {arg}")
        raw = path.read_bytes()
        head = _peek_json_object(raw)
        if "mirror_mass_kg" in head:
            spec = _parse_apparatus(head, "apparatus")
            constants = PhysicalConstants()
        else:
            doc = parse_config(raw)
            spec = _first_apparatus(doc)
            constants = doc.experiment.constants
    report = build_collapse_time_report(arg, spec, models, constants)
    sys.stdout.buffer.write(emit_report(report))
    sys.stdout.buffer.flush()
    return 0


def _peek_json_object(raw: bytes) -> dict:
    try:
        data = json.loads(raw.decode("utf-8"), parse_constant=_reject_constant)
    except (json.JSONDecodeError, UnicodeDecodeError) as e:
        raise ConfigError(f"config syntax error: {e}") from None
    except RecursionError:
        raise ConfigError("config nesting too deep") from None
    if not isinstance(data, dict):
        raise ConfigError("config: expected a JSON object")
    return data


def _first_apparatus(doc: ConfigDocument) -> ApparatusSpec:
    for wing in (doc.experiment.wing_l, doc.experiment.wing_r):
        if isinstance(wing.observer, DeviceObserver):
            return wing.observer.apparatus
    raise ConfigError("config has no device observer to take an apparatus from")


def _cmd_scenarios(args) -> int:
    if args.action == "list":
        for name in scenario_names():
            print(name)
        return 0
    if not args.name:
        raise UsageError("scenarios show requires a scenario name")
    if args.name not in scenario_names():
        raise ConfigError(f"unknown scenario {args.name!r}")
    doc, _ = _load_document(args.name)
    sys.stdout.buffer.write(emit_config_document(doc))
    sys.stdout.buffer.flush()
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="collapsebell",
                     description="Bell-experiment design verification under localized-collapse models")
    sub = parser.add_subparsers(dest="command", required=True)

    pa = sub.add_parser("analyze", help="loophole verdicts and margins for a design")
    pa.add_argument("config", help="scenario name or JSON config path")
    pa.add_argument("--model", action="append", metavar="NAME",
                    help="collapse model preset (repeatable; default: all)")
    pa.add_argument("--safety-k", type=float, dest="safety_k", default=None,
                    help="multiplier on collapse-time estimates (default from config)")
    pa.set_defaults(func=_cmd_analyze)

    ps = sub.add_parser("simulate", help="Monte Carlo trial simulation")
    ps.add_argument("config", help="scenario name or JSON config path")
    ps.add_argument("--engine", choices=sorted(ENGINE_ALIASES), default=None)
    ps.add_argument("--trials", type=int, default=None)
    ps.add_argument("--seed", type=int, default=None)
    ps.add_argument("--model", default=None,
                    help=f"collapse model placing the collapses (default {DEFAULT_SIMULATION_MODEL})")
    ps.add_argument("--csv", default=None, metavar="PATH", help="write the trial log as CSV")
    ps.set_defaults(func=_cmd_simulate)

    pc = sub.add_parser("collapse-time", help="collapse-time estimates for an apparatus")
    pc.add_argument("--model", action="append", metavar="NAME",
                    help="collapse model preset (repeatable; default: all)")
    pc.add_argument("--apparatus", required=True,
                    help="scenario name, config path, or bare apparatus JSON path")
    pc.set_defaults(func=_cmd_collapse_time)

    pn = sub.add_parser("scenarios", help="list or show library scenarios")
    pn.add_argument("action", nargs="?", default="list", choices=("list", "show"))
    pn.add_argument("name", nargs="?", default=None)
    pn.set_defaults(func=_cmd_scenarios)
    return parser


def cli(argv: list[str] | None = None) -> int:
    """Run the CLI; returns the exit code (0 ok, 1 usage, 2 config, 3 model)."""
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except SystemExit as e:  # --help
        return int(e.code or 0)
    try:
        return args.func(args)
    except UsageError as e:
        print(f"usage error: {e}", file=sys.stderr)
        return 1
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except ModelError as e:
        print(f"model error: {e}", file=sys.stderr)
        return 3


def main() -> None:
    sys.exit(cli())


if __name__ == "__main__":
    main()
