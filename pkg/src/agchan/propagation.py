"""Deterministic path-loss models.

Three models: free space, 3GPP TR 38.901 urban-macro (LOS/NLOS), and the
altitude-dependent model this toolkit is built around:

    PL0 = intercept + dist_coeff*log10(d3d) + freq_coeff*log10(f_GHz) - n*h

with separate intercepts and altitude impact factors n per LOS condition.
d3d is in meters, f in gigahertz, h (UAV altitude) in meters.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .geometry import SPEED_OF_LIGHT, LosState, breakpoint_distance


@dataclass(frozen=True)
class Frequency:
    """Carrier frequency with unit accessors."""

    hz: float

    def __post_init__(self):
        if self.hz <= 0:
            raise ValueError("frequency must be positive")

    @property
    def mhz(self) -> float:
        return self.hz / 1e6

    @property
    def ghz(self) -> float:
        return self.hz / 1e9

    @property
    def wavelength_m(self) -> float:
        return SPEED_OF_LIGHT / self.hz

    @classmethod
    def from_ghz(cls, ghz: float) -> "Frequency":
        return cls(ghz * 1e9)

    @classmethod
    def from_mhz(cls, mhz: float) -> "Frequency":
        return cls(mhz * 1e6)


@dataclass(frozen=True)
class PathLossParams:
    """Coefficients of the altitude-dependent loss model.

    n_los / n_nlos are the altitude impact factors in dB per meter of UAV
    altitude; in this toolkit's regime the NLOS factor always exceeds the
    LOS one.
    """

    intercept_los_db: float = 40.55
    intercept_nlos_db: float = 62.41
    dist_coeff: float = 20.0
    freq_coeff: float = 20.0
    n_los: float = 0.0
    n_nlos: float = 0.0

    def __post_init__(self):
        if self.n_los < 0 or self.n_nlos < 0:
            raise ValueError("altitude impact factors must be nonnegative")

    def intercept(self, los: LosState) -> float:
        return self.intercept_los_db if los is LosState.LOS else self.intercept_nlos_db

    def altitude_factor(self, los: LosState) -> float:
        return self.n_los if los is LosState.LOS else self.n_nlos


# Fitted constants shipped with the toolkit (vertical-flight campaign over a
# 350 m campus link; see the bundled presets for the full channel models).
PATHLOSS_1GHZ = PathLossParams(n_los=0.102, n_nlos=1.190)
PATHLOSS_4GHZ = PathLossParams(n_los=0.250, n_nlos=2.075)


class ApplicabilityError(ValueError):
    """Raised in strict mode when a model is evaluated outside its stated range."""

    def __init__(self, message: str, d_break_m: float):
        super().__init__(message)
        self.d_break_m = d_break_m


def fspl(d_km: float, f_mhz: float):
    """Free-space path loss 32.45 + 20 log10(d_km) + 20 log10(f_MHz), in dB."""
    d_km = np.asarray(d_km, dtype=float)
    f_mhz = np.asarray(f_mhz, dtype=float)
    if np.any(d_km <= 0) or np.any(f_mhz <= 0):
        raise ValueError("distance and frequency must be positive")
    out = 32.45 + 20.0 * np.log10(d_km) + 20.0 * np.log10(f_mhz)
    return float(out) if out.ndim == 0 else out


def pl_3gpp_uma(
    d3d_m,
    f_ghz: float,
    uav_altitude_m=None,
    los: LosState = LosState.LOS,
    *,
    d2d_m: float | None = None,
    h_tx_m: float | None = None,
    h_rx_m: float | None = None,
    strict: bool = False,
):
    """3GPP TR 38.901 UMa path loss in dB.

    LOS:  28 + 22 log10(d3d) + 20 log10(f)
    NLOS: 13.54 + 39.08 log10(d3d) + 20 log10(f) - 0.6 (h - 0.5)

    The LOS branch is tabulated for horizontal distances between 10 m and
    the two-ray breakpoint.  Pass d2d_m together with h_tx_m/h_rx_m to have
    that range checked; violations warn by default and raise
    ApplicabilityError when strict=True.
    """
    d3d_m = np.asarray(d3d_m, dtype=float)
    if np.any(d3d_m <= 0) or f_ghz <= 0:
        raise ValueError("distance and frequency must be positive")
    if los is LosState.LOS:
        if d2d_m is not None and h_tx_m is not None and h_rx_m is not None:
            d_break = breakpoint_distance(h_tx_m, h_rx_m, f_ghz * 1e9)
            if not 10.0 <= d2d_m <= d_break:
                msg = (
                    f"UMa LOS model queried at d2d={d2d_m:.1f} m, outside its "
                    f"[10 m, {d_break:.0f} m] applicability range"
                )
                if strict:
                    raise ApplicabilityError(msg, d_break)
                warnings.warn(msg)
        out = 28.0 + 22.0 * np.log10(d3d_m) + 20.0 * math.log10(f_ghz)
    else:
        if uav_altitude_m is None:
            raise ValueError("NLOS branch requires the UAV altitude")
        h = np.asarray(uav_altitude_m, dtype=float)
        out = (
            13.54
            + 39.08 * np.log10(d3d_m)
            + 20.0 * math.log10(f_ghz)
            - 0.6 * (h - 0.5)
        )
    return float(out) if np.ndim(out) == 0 else out


def pl_altitude_model(d3d_m, f_ghz: float, uav_altitude_m, los: LosState, params: PathLossParams):
    """Altitude-dependent loss model, one LOS condition at a time (dB)."""
    d3d_m = np.asarray(d3d_m, dtype=float)
    h = np.asarray(uav_altitude_m, dtype=float)
    if np.any(d3d_m <= 0) or f_ghz <= 0:
        raise ValueError("distance and frequency must be positive")
    if np.any(h < 0):
        raise ValueError("UAV altitude must be nonnegative")
    out = (
        params.intercept(los)
        + params.dist_coeff * np.log10(d3d_m)
        + params.freq_coeff * math.log10(f_ghz)
        - params.altitude_factor(los) * h
    )
    return float(out) if out.ndim == 0 else out


def params_to_text(name: str, params: PathLossParams) -> str:
    """Serialize a parameter set to the line-oriented `key = value` format."""
    lines = [
        f"model = {name}",
        f"intercept_los_db = {params.intercept_los_db!r}",
        f"intercept_nlos_db = {params.intercept_nlos_db!r}",
        f"dist_coeff = {params.dist_coeff!r}",
        f"freq_coeff = {params.freq_coeff!r}",
        f"n_los = {params.n_los!r}",
        f"n_nlos = {params.n_nlos!r}",
    ]
    return "\n".join(lines) + "\n"


def params_from_text(text: str) -> tuple[str, PathLossParams]:
    """Inverse of params_to_text; returns (model name, params)."""
    fields: dict[str, str] = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"malformed parameter line: {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        fields[key] = value
    try:
        name = fields.pop("model")
        params = PathLossParams(**{key: float(val) for key, val in fields.items()})
    except (KeyError, TypeError) as exc:
        raise ValueError(f"incomplete parameter set: {exc}") from exc
    return name, params
