"""Forward synthesis of loss traces for a vertical flight, plus link budget.

A stored trace sample emulates the measurement storage chain: per altitude
bin, averaging_factor instantaneous values are averaged in the linear
domain, and a round trip contributes two passes over the same altitude grid
that are averaged the same way.

Shadowing and fast fading are generated as spatially correlated processes
tied to position along the flight path, so repeated passes see the same
large-scale environment:

  * shadowing: independent standard-normal anchors every ``sf_anchor_m``
    meters with variance-preserving linear interpolation, scaled by the
    per-condition sigma.  The anchor spacing is in meters, not wavelengths:
    shadowing comes from the environment geometry and the campaign this
    models found it frequency-independent;
  * fast fading: a standard-normal field anchored every
    ``ff_anchor_wavelengths`` wavelengths is mixed per instantaneous draw
    with an independent component (weight ``ff_mixing`` on the field), and
    the result is mapped through the per-condition envelope quantile
    function.  Every draw therefore has exactly the configured marginal
    distribution while consecutive samples stay correlated at wavelength
    scale, which is what lets the sliding-window analysis recover the
    generating distribution.

The dB fading term is clipped to [-ff_clip_down_db, +ff_clip_up_db]
(dynamic-range emulation).  The upper bound matters most: heavy-tailed
envelope draws above it would dominate the linear window averages in a way
no measurement chain reproduces; deep fades contribute almost nothing to a
linear mean, so the lower bound can stay loose.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np
from scipy import special

from .extraction import Trace, db_mean
from .geometry import ScenarioGeometry, LosState, los_mask, CAMPUS_SCENARIO
from .propagation import Frequency, PathLossParams
from .stochastic import FadingDistribution, ShadowingParams


@dataclass(frozen=True)
class FlightConfig:
    """Vertical-flight synthesis configuration."""

    scenario: ScenarioGeometry = CAMPUS_SCENARIO
    freq: Frequency = Frequency(1e9)
    altitude_min_m: float = 0.0
    altitude_max_m: float = 24.0
    spatial_resolution: float = 62.5  # stored samples per meter
    averaging_factor: int = 20  # instantaneous draws per stored sample
    round_trips: int = 1
    seed: int = 0
    sf_anchor_m: float = 1.5
    ff_anchor_wavelengths: float = 1.0
    ff_mixing: float = 0.995
    ff_clip_up_db: float = 27.0
    ff_clip_down_db: float = 40.0

    def __post_init__(self):
        if self.altitude_min_m >= self.altitude_max_m:
            raise ValueError("altitude range must be nonempty")
        if self.altitude_min_m < 0:
            raise ValueError("altitudes must be nonnegative")
        if self.spatial_resolution <= 0:
            raise ValueError("spatial resolution must be positive")
        if self.averaging_factor < 1 or self.round_trips < 1:
            raise ValueError("averaging factor and round trips must be >= 1")
        if not 0.0 <= self.ff_mixing <= 1.0:
            raise ValueError("ff_mixing must lie in [0, 1]")
        if self.sf_anchor_m <= 0 or self.ff_anchor_wavelengths <= 0:
            raise ValueError("anchor spacings must be positive")
        if self.ff_clip_up_db <= 0 or self.ff_clip_down_db <= 0:
            raise ValueError("fading clip bounds must be positive")

    def altitude_grid(self) -> np.ndarray:
        """Bin-center altitudes of the stored samples."""
        step = 1.0 / self.spatial_resolution
        n = round((self.altitude_max_m - self.altitude_min_m) * self.spatial_resolution)
        return self.altitude_min_m + (np.arange(n) + 0.5) * step


@dataclass(frozen=True)
class LinkBudget:
    tx_power_dbm: float = 30.0
    tx_gain_dbi: float = 3.0
    rx_gain_dbi: float = 2.15
    noise_floor_dbm: float = -120.0

    def __post_init__(self):
        if self.tx_power_dbm - self.noise_floor_dbm < 0:
            raise ValueError("link margin (tx power minus noise floor) must be nonnegative")

    @property
    def link_margin_db(self) -> float:
        return self.tx_power_dbm - self.noise_floor_dbm


class AnchoredField:
    """Standard-normal spatial field from iid anchors on a regular grid.

    Linear interpolation between anchors is rescaled so the marginal stays
    exactly N(0, 1) at every position; the anchor spacing sets the
    correlation length.
    """

    def __init__(self, rng: np.random.Generator, origin: float, spacing: float, extent: float):
        if spacing <= 0:
            raise ValueError("anchor spacing must be positive")
        self.origin = origin
        self.spacing = spacing
        n_anchors = int(math.floor(extent / spacing)) + 2
        self.anchors = rng.standard_normal(n_anchors)

    def __call__(self, positions: np.ndarray) -> np.ndarray:
        t = (np.asarray(positions, dtype=float) - self.origin) / self.spacing
        idx = np.clip(t.astype(int), 0, self.anchors.size - 2)
        frac = t - idx
        raw = (1.0 - frac) * self.anchors[idx] + frac * self.anchors[idx + 1]
        return raw / np.hypot(1.0 - frac, frac)


def _condition_values(values_by_cond, is_los, shape):
    out = np.empty(shape)
    out[is_los] = values_by_cond[LosState.LOS]
    out[~is_los] = values_by_cond[LosState.NLOS]
    return out


def synthesize_flight(
    config: FlightConfig,
    pl_params: PathLossParams,
    shadowing: dict[LosState, ShadowingParams],
    fading: dict[LosState, FadingDistribution] | None,
) -> Trace:
    """Generate the stored loss trace of one (possibly multi-round-trip) flight.

    shadowing and fading map each LOS condition to its parameters; fading
    may be None for a deterministic unit envelope.
    """
    grid = config.altitude_grid()
    n = grid.size
    k = config.averaging_factor
    passes = 2 * config.round_trips
    lam = config.freq.wavelength_m

    seq = np.random.SeedSequence(config.seed)
    rng_sf, rng_ff, rng_draw = (np.random.default_rng(s) for s in seq.spawn(3))

    is_los = los_mask(config.scenario, grid)
    from .propagation import pl_altitude_model  # local import avoids a cycle at module load

    pl0 = np.empty(n)
    d3d = np.hypot(config.scenario.horizontal_distance_m, config.scenario.gs_height_m - grid)
    for cond, mask in ((LosState.LOS, is_los), (LosState.NLOS, ~is_los)):
        if np.any(mask):
            pl0[mask] = pl_altitude_model(d3d[mask], config.freq.ghz, grid[mask], cond, pl_params)

    extent = config.altitude_max_m - config.altitude_min_m
    sf_field = AnchoredField(rng_sf, config.altitude_min_m, config.sf_anchor_m, extent)
    sigma = _condition_values({c: shadowing[c].sigma_db for c in shadowing}, is_los, n)
    mean = _condition_values({c: shadowing[c].mean_db for c in shadowing}, is_los, n)
    sf = mean + sigma * sf_field(grid)

    if fading is None:
        return Trace(grid, pl0 + sf, config.freq, config.spatial_resolution, config.scenario)

    # instantaneous draw sub-positions within each stored bin
    step = 1.0 / config.spatial_resolution
    offsets = (np.arange(k) - (k - 1) / 2.0) * (step / k)
    sub_pos = grid[:, None] + offsets[None, :]
    ff_field = AnchoredField(rng_ff, config.altitude_min_m - step, config.ff_anchor_wavelengths * lam, extent + 2 * step)
    z_field = ff_field(sub_pos.ravel()).reshape(n, k)

    rho = config.ff_mixing
    indep = math.sqrt(1.0 - rho * rho)
    stored_lin = np.zeros(n)
    for _ in range(passes):
        z = rho * z_field
        if indep > 0:
            z = z + indep * rng_draw.standard_normal((n, k))
        u = special.ndtr(z)
        env = np.empty((n, k))
        for cond, mask in ((LosState.LOS, is_los), (LosState.NLOS, ~is_los)):
            if np.any(mask):
                env[mask] = fading[cond].quantile(u[mask])
        ff_db = np.clip(20.0 * np.log10(env), -config.ff_clip_down_db, config.ff_clip_up_db)
        draws = pl0[:, None] + sf[:, None] + ff_db
        stored_lin += np.mean(10.0 ** (draws / 10.0), axis=1)

    loss = 10.0 * np.log10(stored_lin / passes)
    return Trace(grid, loss, config.freq, config.spatial_resolution, config.scenario)


def received_power(trace: Trace, budget: LinkBudget) -> tuple[np.ndarray, np.ndarray]:
    """Per-sample received power in dBm and a flag where it falls below the noise floor."""
    p_rx = budget.tx_power_dbm + budget.tx_gain_dbi + budget.rx_gain_dbi - trace.loss_db
    return p_rx, p_rx < budget.noise_floor_dbm


def with_seed(config: FlightConfig, seed: int) -> FlightConfig:
    return replace(config, seed=seed)
