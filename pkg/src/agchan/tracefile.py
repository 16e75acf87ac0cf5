"""File formats: trace CSV, key-value config files, and the JSON fit report.

Trace CSV ("agchan trace v1"): `#`-prefixed metadata lines carrying the
frequency, resolution and scenario, one header line, then
``altitude_m,loss_db`` rows at 6 decimal places.  Writing a trace that was
read back reproduces the file byte for byte.

Config files are flat ``key = value`` text; `#` starts a comment.  Scenario
keys: horizontal_distance_m, gs_height_m, blocker_distance_m,
blocker_height_m.  Flight keys: freq_hz, altitude_min_m, altitude_max_m,
spatial_resolution, averaging_factor, round_trips, seed, sf_anchor_m,
ff_anchor_wavelengths, ff_mixing, ff_clip_up_db, ff_clip_down_db.  Channel
keys (used by the "custom" preset): intercept_los_db, intercept_nlos_db,
dist_coeff, freq_coeff, n_los, n_nlos, sigma_los_db, sigma_nlos_db,
ll_alpha_los, ll_beta_los, ll_alpha_nlos, ll_beta_nlos.  Every key is
optional and falls back to the built-in default.

The fit report is a JSON document with sorted keys; identical inputs
produce identical bytes.
"""

from __future__ import annotations

import dataclasses
import hashlib
import io
import json
from pathlib import Path

import numpy as np

from . import __version__ as _version
from .extraction import (
    ConditionReport,
    Decomposition,
    FadingFit,
    FitMode,
    FitReport,
    Trace,
    analyze_decomposition,
    decompose,
)
from .geometry import LosState, ScenarioGeometry, CAMPUS_SCENARIO
from .propagation import Frequency, PathLossParams
from .stochastic import (
    FadingDistribution,
    Family,
    LogLogisticParams,
    NakagamiParams,
    RayleighParams,
    RicianParams,
    ShadowingParams,
    db_to_envelope,
)
from .synthesis import FlightConfig


class ConfigError(ValueError):
    """Malformed or inconsistent configuration input."""


# ---------------------------------------------------------------------------
# key = value config files

def parse_kv(text: str) -> dict[str, str]:
    fields: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {lineno}: expected 'key = value', got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if not key or not value:
            raise ConfigError(f"line {lineno}: empty key or value")
        fields[key] = value
    return fields


def _pop_float(kv: dict[str, str], key: str, default: float) -> float:
    if key not in kv:
        return default
    try:
        return float(kv.pop(key))
    except ValueError as exc:
        raise ConfigError(f"{key}: not a number") from exc


def _pop_int(kv: dict[str, str], key: str, default: int) -> int:
    if key not in kv:
        return default
    try:
        return int(kv.pop(key))
    except ValueError as exc:
        raise ConfigError(f"{key}: not an integer") from exc


_SCENARIO_KEYS = ("horizontal_distance_m", "gs_height_m", "blocker_distance_m", "blocker_height_m")


def scenario_from_kv(kv: dict[str, str], default: ScenarioGeometry = CAMPUS_SCENARIO) -> ScenarioGeometry:
    values = {key: _pop_float(kv, key, getattr(default, key)) for key in _SCENARIO_KEYS}
    try:
        return ScenarioGeometry(**values)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def load_scenario(path: str | Path) -> ScenarioGeometry:
    kv = parse_kv(Path(path).read_text())
    scenario = scenario_from_kv(kv)
    unknown = set(kv) - _CHANNEL_KEYS - _FLIGHT_KEYS
    if unknown:
        raise ConfigError(f"unknown scenario keys: {sorted(unknown)}")
    return scenario


_FLIGHT_KEYS = {
    "freq_hz", "altitude_min_m", "altitude_max_m", "spatial_resolution",
    "averaging_factor", "round_trips", "seed", "sf_anchor_m",
    "ff_anchor_wavelengths", "ff_mixing", "ff_clip_up_db", "ff_clip_down_db",
}

_CHANNEL_KEYS = {
    "intercept_los_db", "intercept_nlos_db", "dist_coeff", "freq_coeff",
    "n_los", "n_nlos", "sigma_los_db", "sigma_nlos_db",
    "ll_alpha_los", "ll_beta_los", "ll_alpha_nlos", "ll_beta_nlos",
}


def flight_config_from_kv(kv: dict[str, str], default: FlightConfig = FlightConfig()) -> FlightConfig:
    scenario = scenario_from_kv(kv, default.scenario)
    try:
        cfg = FlightConfig(
            scenario=scenario,
            freq=Frequency(_pop_float(kv, "freq_hz", default.freq.hz)),
            altitude_min_m=_pop_float(kv, "altitude_min_m", default.altitude_min_m),
            altitude_max_m=_pop_float(kv, "altitude_max_m", default.altitude_max_m),
            spatial_resolution=_pop_float(kv, "spatial_resolution", default.spatial_resolution),
            averaging_factor=_pop_int(kv, "averaging_factor", default.averaging_factor),
            round_trips=_pop_int(kv, "round_trips", default.round_trips),
            seed=_pop_int(kv, "seed", default.seed),
            sf_anchor_m=_pop_float(kv, "sf_anchor_m", default.sf_anchor_m),
            ff_anchor_wavelengths=_pop_float(kv, "ff_anchor_wavelengths", default.ff_anchor_wavelengths),
            ff_mixing=_pop_float(kv, "ff_mixing", default.ff_mixing),
            ff_clip_up_db=_pop_float(kv, "ff_clip_up_db", default.ff_clip_up_db),
            ff_clip_down_db=_pop_float(kv, "ff_clip_down_db", default.ff_clip_down_db),
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    unknown = set(kv) - _CHANNEL_KEYS
    if unknown:
        raise ConfigError(f"unknown config keys: {sorted(unknown)}")
    return cfg


def load_flight_config(path: str | Path) -> FlightConfig:
    return flight_config_from_kv(parse_kv(Path(path).read_text()))


def channel_from_kv(kv: dict[str, str]) -> tuple[PathLossParams, dict, dict]:
    """Custom channel parameters: path loss, shadowing and fading per condition."""
    try:
        pl = PathLossParams(
            intercept_los_db=_pop_float(kv, "intercept_los_db", 40.55),
            intercept_nlos_db=_pop_float(kv, "intercept_nlos_db", 62.41),
            dist_coeff=_pop_float(kv, "dist_coeff", 20.0),
            freq_coeff=_pop_float(kv, "freq_coeff", 20.0),
            n_los=_pop_float(kv, "n_los", 0.0),
            n_nlos=_pop_float(kv, "n_nlos", 0.0),
        )
        shadowing = {
            LosState.LOS: ShadowingParams(sigma_db=_pop_float(kv, "sigma_los_db", 2.0)),
            LosState.NLOS: ShadowingParams(sigma_db=_pop_float(kv, "sigma_nlos_db", 3.2)),
        }
        fading = {
            LosState.LOS: LogLogisticParams(
                alpha=_pop_float(kv, "ll_alpha_los", 1.0), beta=_pop_float(kv, "ll_beta_los", 1.41)
            ),
            LosState.NLOS: LogLogisticParams(
                alpha=_pop_float(kv, "ll_alpha_nlos", 1.0), beta=_pop_float(kv, "ll_beta_nlos", 1.74)
            ),
        }
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    return pl, shadowing, fading


# ---------------------------------------------------------------------------
# trace CSV

_TRACE_MAGIC = "# agchan trace v1"


def trace_to_csv(trace: Trace) -> str:
    buf = io.StringIO()
    buf.write(_TRACE_MAGIC + "\n")
    buf.write(f"# freq_hz = {trace.freq.hz!r}\n")
    buf.write(f"# spatial_resolution = {trace.spatial_resolution!r}\n")
    for key in _SCENARIO_KEYS:
        buf.write(f"# {key} = {getattr(trace.scenario, key)!r}\n")
    buf.write("altitude_m,loss_db\n")
    for alt, loss in zip(trace.altitudes_m, trace.loss_db):
        buf.write(f"{alt:.6f},{loss:.6f}\n")
    return buf.getvalue()


def write_trace(trace: Trace, path: str | Path) -> None:
    Path(path).write_text(trace_to_csv(trace))


def trace_from_csv(text: str, scenario: ScenarioGeometry | None = None) -> Trace:
    meta: dict[str, str] = {}
    rows: list[tuple[float, float]] = []
    lines = text.splitlines()
    if not lines or lines[0].strip() != _TRACE_MAGIC:
        raise ConfigError("not an agchan trace file (missing magic header)")
    for raw in lines[1:]:
        line = raw.strip()
        if not line:
            continue
        if line.startswith("#"):
            body = line[1:].strip()
            if "=" in body:
                key, value = (part.strip() for part in body.split("=", 1))
                meta[key] = value
            continue
        if line.startswith("altitude_m"):
            continue
        parts = line.split(",")
        if len(parts) != 2:
            raise ConfigError(f"malformed trace row: {raw!r}")
        rows.append((float(parts[0]), float(parts[1])))
    if "freq_hz" not in meta or "spatial_resolution" not in meta:
        raise ConfigError("trace file lacks freq_hz / spatial_resolution metadata")
    if scenario is None:
        scenario = scenario_from_kv(dict(meta))
    data = np.asarray(rows, dtype=float)
    if data.size == 0:
        raise ConfigError("trace file contains no samples")
    return Trace.from_samples(
        data[:, 0], data[:, 1],
        freq=Frequency(float(meta["freq_hz"])),
        spatial_resolution=float(meta["spatial_resolution"]),
        scenario=scenario,
    )


def read_trace(path: str | Path, scenario: ScenarioGeometry | None = None) -> Trace:
    return trace_from_csv(Path(path).read_text(), scenario)


# ---------------------------------------------------------------------------
# fit report JSON

def _dist_to_dict(fit: FadingFit) -> dict:
    entry = {
        "family": fit.family.value,
        "params": dataclasses.asdict(fit.dist),
        "log_likelihood": fit.log_likelihood,
    }
    if isinstance(fit.dist, RicianParams):
        entry["params"]["k_factor"] = fit.dist.k_factor
    return entry


_DIST_TYPES = {
    Family.LOG_LOGISTIC: LogLogisticParams,
    Family.RAYLEIGH: RayleighParams,
    Family.RICIAN: RicianParams,
    Family.NAKAGAMI_M: NakagamiParams,
    Family.WEIBULL: WeibullParams,
}


def dist_from_dict(entry: dict) -> FadingDistribution:
    family = Family(entry["family"])
    cls = _DIST_TYPES[family]
    names = {f.name for f in dataclasses.fields(cls)}
    params = {k: v for k, v in entry["params"].items() if k in names}
    return cls(**params)


def _condition_to_dict(report: ConditionReport) -> dict:
    return {
        "shadowing": {
            "mean_db": report.shadowing.params.mean_db,
            "sigma_db": report.shadowing.params.sigma_db,
            "max_abs_db": report.shadowing.max_abs_db,
            "n_samples": report.shadowing.n_samples,
        },
        "fading": [_dist_to_dict(fit) for fit in report.fading],
        "fading_depth_db": report.fading_depth_db,
        "ff_percentile_1_db": report.ff_percentile_1_db,
        "ff_percentile_50_db": report.ff_percentile_50_db,
        "ff_max_db": report.ff_max_db,
        "ff_min_db": report.ff_min_db,
        "ff_max_abs_db": report.ff_max_abs_db,
        "n_samples": report.n_samples,
        "n_stat_samples": report.n_stat_samples,
    }


def report_to_dict(report: FitReport, provenance: dict | None = None) -> dict:
    pl = report.pathloss
    doc = {
        "tool": "agchan",
        "version": _version,
        "mode": pl.mode.value,
        "pathloss": {
            "params": dataclasses.asdict(pl.params),
            "los": dataclasses.asdict(pl.los) if pl.los else None,
            "nlos": dataclasses.asdict(pl.nlos) if pl.nlos else None,
        },
        "conditions": {
            cond.value: _condition_to_dict(rep) for cond, rep in report.conditions.items()
        },
    }
    doc["provenance"] = provenance or {}
    return doc


def report_to_json(report: FitReport, provenance: dict | None = None) -> str:
    return json.dumps(report_to_dict(report, provenance), indent=2, sort_keys=True) + "\n"


def write_report(report: FitReport, path: str | Path, provenance: dict | None = None) -> None:
    Path(path).write_text(report_to_json(report, provenance))


def read_report(path: str | Path) -> dict:
    return json.loads(Path(path).read_text())


def sha256_text(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()


# ---------------------------------------------------------------------------
# full report document (fits + decimated empirical series for plotting)

_MAX_TRACE_POINTS = 800
_ECDF_POINTS = 256
_SF_BINS = 41


def _decimate(arr: np.ndarray, limit: int) -> np.ndarray:
    stride = max(1, -(-arr.size // limit))
    return arr[::stride]


def _empirical_payload(decomp: Decomposition) -> dict:
    trace = decomp.trace
    is_los = trace.los()
    payload = {
        "freq_hz": trace.freq.hz,
        "spatial_resolution": trace.spatial_resolution,
        "scenario": {key: getattr(trace.scenario, key) for key in _SCENARIO_KEYS},
        "pathloss": {
            "altitude_m": _decimate(trace.altitudes_m, _MAX_TRACE_POINTS).tolist(),
            "loss_db": _decimate(trace.loss_db, _MAX_TRACE_POINTS).tolist(),
            "trend_db": _decimate(decomp.large_scale, _MAX_TRACE_POINTS).tolist(),
        },
        "conditions": {},
    }
    for cond, mask in ((LosState.LOS, is_los), (LosState.NLOS, ~is_los)):
        pool = mask & decomp.stat_mask
        if pool.sum() < 2:
            continue
        sf = decomp.sf[pool]
        density, edges = np.histogram(sf, bins=_SF_BINS, density=True)
        env = np.sort(db_to_envelope(decomp.ff_analysis[pool]))
        take = np.unique(np.linspace(0, env.size - 1, min(_ECDF_POINTS, env.size)).astype(int))
        payload["conditions"][cond.value] = {
            "sf_bin_centers_db": (0.5 * (edges[:-1] + edges[1:])).tolist(),
            "sf_density": density.tolist(),
            "ff_ecdf_x": env[take].tolist(),
            "ff_ecdf_p": ((take + 1) / env.size).tolist(),
        }
    return payload


def build_report_doc(
    trace: Trace,
    mode: FitMode = FitMode.FREE_INTERCEPTS,
    families=None,
    provenance: dict | None = None,
) -> dict:
    """Run the inverse pipeline and assemble the full report document."""
    decomp = decompose(trace, mode)
    report = analyze_decomposition(decomp, families)
    doc = report_to_dict(report, provenance)
    doc["empirical"] = _empirical_payload(decomp)
    return doc


def doc_to_json(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"
