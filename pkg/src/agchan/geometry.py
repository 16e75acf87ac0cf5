"""Link geometry for a vertical UAV flight against a single blocking building.

The scenario is planar: the UAV ascends vertically at horizontal distance D
from the ground station (GS) antenna, and one rectangular building between
them can obstruct the direct ray.  Everything here is pure geometry; no
propagation physics.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0  # m/s


class LosState(Enum):
    LOS = "los"
    NLOS = "nlos"


@dataclass(frozen=True)
class ScenarioGeometry:
    """Static placement of GS, UAV ground point and the blocking building.

    horizontal_distance_m: ground-plane Tx-Rx separation D
    gs_height_m: GS antenna height above ground
    blocker_distance_m: horizontal distance from the UAV ground point to the
        building face crossed by the link (must be < horizontal_distance_m)
    blocker_height_m: building height; 0 disables obstruction
    """

    horizontal_distance_m: float
    gs_height_m: float
    blocker_distance_m: float
    blocker_height_m: float

    def __post_init__(self):
        if self.horizontal_distance_m <= 0 or self.gs_height_m <= 0:
            raise ValueError("horizontal distance and GS height must be positive")
        if self.blocker_distance_m <= 0:
            raise ValueError("blocker distance must be positive")
        if self.blocker_height_m < 0:
            raise ValueError("blocker height must be nonnegative")
        if self.blocker_distance_m >= self.horizontal_distance_m:
            raise ValueError("blocker must sit between UAV and GS")


# Default scenario: 350 m link, 25 m GS on a rooftop, 15 m building.  The
# building position is not directly observable; 100 m places the geometric
# LOS/NLOS transition at exactly 11 m of UAV altitude, matching the campaign
# this toolkit is calibrated against.
CAMPUS_SCENARIO = ScenarioGeometry(
    horizontal_distance_m=350.0,
    gs_height_m=25.0,
    blocker_distance_m=100.0,
    blocker_height_m=15.0,
)


@dataclass(frozen=True)
class LinkGeometry:
    """Resolved geometry of one Tx/Rx placement."""

    uav_altitude_m: float
    d2d_m: float
    d3d_m: float
    elevation_deg: float
    los: LosState


def link_distances(scenario: ScenarioGeometry, uav_altitude_m: float) -> tuple[float, float]:
    """2-D and 3-D Tx-Rx separation in meters for a UAV altitude."""
    if uav_altitude_m < 0:
        raise ValueError("UAV altitude must be nonnegative")
    d2d = scenario.horizontal_distance_m
    d3d = math.hypot(d2d, scenario.gs_height_m - uav_altitude_m)
    return d2d, d3d


def elevation_angle(uav_altitude_m: float, gs_height_m: float, horizontal_distance_m: float) -> float:
    """Elevation angle arctan((h_rx - h_tx) / D) in degrees.

    Positive while the UAV is below the GS antenna; the sign is preserved
    when it climbs above.
    """
    if horizontal_distance_m <= 0:
        raise ValueError("horizontal distance must be positive")
    return math.degrees(math.atan2(gs_height_m - uav_altitude_m, horizontal_distance_m))


def los_transition_altitude(scenario: ScenarioGeometry) -> float:
    """UAV altitude at which the direct ray grazes the blocker top.

    Below this altitude the link is obstructed (NLOS).  May be <= 0 when the
    blocker never obstructs (e.g. zero height).
    """
    d = scenario.horizontal_distance_m
    b = scenario.blocker_distance_m
    return (scenario.blocker_height_m * d - scenario.gs_height_m * b) / (d - b)


def ray_height_at_blocker(scenario: ScenarioGeometry, uav_altitude_m):
    """Height of the UAV-GS segment above ground at the blocker face."""
    frac = scenario.blocker_distance_m / scenario.horizontal_distance_m
    return uav_altitude_m + (scenario.gs_height_m - uav_altitude_m) * frac


def los_state(scenario: ScenarioGeometry, uav_altitude_m: float) -> LosState:
    """Geometric LOS/NLOS state: NLOS while the ray clears below the blocker top."""
    if uav_altitude_m < 0:
        raise ValueError("UAV altitude must be nonnegative")
    if scenario.blocker_height_m == 0:
        return LosState.LOS
    if ray_height_at_blocker(scenario, uav_altitude_m) <= scenario.blocker_height_m:
        return LosState.NLOS
    return LosState.LOS


def los_mask(scenario: ScenarioGeometry, altitudes_m: np.ndarray) -> np.ndarray:
    """Vectorized los_state: True where LOS."""
    altitudes_m = np.asarray(altitudes_m, dtype=float)
    if np.any(altitudes_m < 0):
        raise ValueError("UAV altitude must be nonnegative")
    if scenario.blocker_height_m == 0:
        return np.ones(altitudes_m.shape, dtype=bool)
    return ray_height_at_blocker(scenario, altitudes_m) > scenario.blocker_height_m


def breakpoint_distance(h_tx_m: float, h_rx_m: float, freq_hz: float) -> float:
    """Two-ray breakpoint distance 4 * h_tx * h_rx / wavelength, in meters."""
    if h_tx_m <= 0 or h_rx_m <= 0 or freq_hz <= 0:
        raise ValueError("heights and frequency must be positive")
    wavelength = SPEED_OF_LIGHT / freq_hz
    return 4.0 * h_tx_m * h_rx_m / wavelength


def link_geometry(scenario: ScenarioGeometry, uav_altitude_m: float) -> LinkGeometry:
    """Bundle distances, elevation and LOS state for one altitude."""
    d2d, d3d = link_distances(scenario, uav_altitude_m)
    return LinkGeometry(
        uav_altitude_m=uav_altitude_m,
        d2d_m=d2d,
        d3d_m=d3d,
        elevation_deg=elevation_angle(uav_altitude_m, scenario.gs_height_m, d2d),
        los=los_state(scenario, uav_altitude_m),
    )
