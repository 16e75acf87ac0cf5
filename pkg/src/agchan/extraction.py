"""Inverse pipeline: decompose a loss trace and fit every model parameter.

The decomposition follows the classical local-mean separation.  Window
averages are taken in the linear domain (values x in dB are averaged as
10^(x/10) and converted back); averaging raw dB values would bias the local
mean, and this choice is the single convention most likely to silently
diverge between implementations, so it is pinned here and in the tests.

Two windows are used: a trend window of 40 wavelengths isolates path loss
plus shadowing, and a fading window of half a wavelength smooths the
per-sample fast fading.  Both use centered windows that shrink at the trace
edges, so every series keeps the input length.

Bookkeeping of the returned Decomposition:

  pl0_fit     trend-window average of the fitted altitude model
  sf          large_scale - pl0_fit          (shadow fading)
  ff          trace - large_scale            (fast fading + residual noise)

so pl0_fit + sf + ff reconstructs the input exactly at every sample.  The
series used for fast-fading statistics, ``ff_analysis``, is the
fading-window smoothed fast fading re-centered by the model curve's own
window response; on a noiseless trace it is identically zero.

The altitude-model fit runs on the distance/frequency-compensated raw
trace, not on the smoothed series: ordinary least squares on the raw
samples is unbiased, recovers noiseless parameters to machine precision,
and avoids the window's edge bias.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from enum import Enum

import numpy as np
from scipy import optimize, special

from .geometry import ScenarioGeometry, LosState, los_mask, los_transition_altitude
from .propagation import Frequency, PathLossParams
from .stochastic import (
    FAMILY_ORDER,
    FadingDistribution,
    Family,
    LogLogisticParams,
    NakagamiParams,
    RayleighParams,
    RicianParams,
    ShadowingParams,
    WeibullParams,
    db_to_envelope,
    fading_depth,
    percentile,
)

TREND_WINDOW_WAVELENGTHS = 40.0
FADING_WINDOW_WAVELENGTHS = 0.5


class FitError(RuntimeError):
    """A regression or likelihood fit could not be completed."""


class FitMode(Enum):
    FREE_INTERCEPTS = "free"
    FIXED_INTERCEPTS = "fixed"


@dataclass(frozen=True)
class Trace:
    """Ordered (altitude, loss) samples of one vertical flight.

    altitudes_m must be nondecreasing; use from_samples() to sort raw data.
    spatial_resolution is in stored samples per meter of altitude.
    """

    altitudes_m: np.ndarray
    loss_db: np.ndarray
    freq: Frequency
    spatial_resolution: float
    scenario: ScenarioGeometry

    def __post_init__(self):
        alt = np.asarray(self.altitudes_m, dtype=float)
        loss = np.asarray(self.loss_db, dtype=float)
        object.__setattr__(self, "altitudes_m", alt)
        object.__setattr__(self, "loss_db", loss)
        if alt.ndim != 1 or alt.shape != loss.shape:
            raise ValueError("altitudes and losses must be 1-D arrays of equal length")
        if alt.size < 2:
            raise ValueError("a trace needs at least two samples")
        if np.any(np.diff(alt) < 0):
            raise ValueError("altitudes must be nondecreasing; use Trace.from_samples")
        if self.spatial_resolution <= 0:
            raise ValueError("spatial resolution must be positive")

    @classmethod
    def from_samples(cls, altitudes_m, loss_db, freq, spatial_resolution, scenario) -> "Trace":
        alt = np.asarray(altitudes_m, dtype=float)
        loss = np.asarray(loss_db, dtype=float)
        order = np.argsort(alt, kind="stable")
        return cls(alt[order], loss[order], freq, spatial_resolution, scenario)

    def __len__(self) -> int:
        return self.altitudes_m.size

    def with_loss(self, loss_db: np.ndarray) -> "Trace":
        return Trace(self.altitudes_m, loss_db, self.freq, self.spatial_resolution, self.scenario)

    def d3d_m(self) -> np.ndarray:
        dh = self.scenario.gs_height_m - self.altitudes_m
        return np.hypot(self.scenario.horizontal_distance_m, dh)

    def los(self) -> np.ndarray:
        """Boolean mask, True where the geometry gives LOS."""
        return los_mask(self.scenario, self.altitudes_m)


def db_mean(values_db, axis=None):
    """Linear-domain average of dB values: 10*log10(mean(10^(x/10)))."""
    values_db = np.asarray(values_db, dtype=float)
    out = 10.0 * np.log10(np.mean(10.0 ** (values_db / 10.0), axis=axis))
    return float(out) if np.ndim(out) == 0 else out


def window_meters(window_wavelengths: float, freq: Frequency) -> float:
    return window_wavelengths * freq.wavelength_m


def _sliding_linear_mean(values_db: np.ndarray, half_width: int) -> np.ndarray:
    lin = 10.0 ** (values_db / 10.0)
    csum = np.concatenate(([0.0], np.cumsum(lin)))
    idx = np.arange(values_db.size)
    lo = np.maximum(idx - half_width, 0)
    hi = np.minimum(idx + half_width + 1, values_db.size)
    return 10.0 * np.log10((csum[hi] - csum[lo]) / (hi - lo))


def local_mean(trace: Trace, window_wavelengths: float) -> Trace:
    """Centered sliding average in the linear domain over a wavelength-sized window.

    The window length is window_wavelengths * lambda converted to samples via
    the trace resolution.  Edge samples use truncated (shrinking) windows.  A
    window shorter than one sample spacing warns and returns the input
    unchanged.
    """
    if window_wavelengths <= 0:
        raise ValueError("window must be positive")
    span = window_meters(window_wavelengths, trace.freq) * trace.spatial_resolution
    if span < 1.0:
        warnings.warn("window shorter than one sample spacing; returning the trace unchanged")
        return trace
    half = int(span) // 2
    if half == 0:
        return trace
    return trace.with_loss(_sliding_linear_mean(trace.loss_db, half))


def _window_half_width(trace: Trace, window_wavelengths: float) -> int:
    span = window_meters(window_wavelengths, trace.freq) * trace.spatial_resolution
    return int(span) // 2 if span >= 1.0 else 0


@dataclass(frozen=True)
class ConditionFit:
    """Altitude-model parameters recovered for one LOS condition."""

    intercept_db: float
    altitude_factor: float
    residual_rms_db: float
    n_samples: int


@dataclass(frozen=True)
class PathLossFit:
    params: PathLossParams
    mode: FitMode
    los: ConditionFit | None
    nlos: ConditionFit | None

    def condition(self, los: LosState) -> ConditionFit | None:
        return self.los if los is LosState.LOS else self.nlos


def fit_altitude_model(
    trace: Trace,
    mode: FitMode = FitMode.FREE_INTERCEPTS,
    reference: PathLossParams = PathLossParams(),
) -> PathLossFit:
    """Least-squares fit of the altitude-dependent model to a loss trace.

    The distance and frequency terms (fixed coefficients from ``reference``)
    are subtracted per sample, leaving the residual y = intercept - n*h to
    regress on altitude for each LOS condition separately.  FIXED_INTERCEPTS
    pins the intercepts at the reference values and fits only n.
    """
    compensated = (
        trace.loss_db
        - reference.dist_coeff * np.log10(trace.d3d_m())
        - reference.freq_coeff * math.log10(trace.freq.ghz)
    )
    is_los = trace.los()

    results: dict[LosState, ConditionFit | None] = {}
    fitted: dict[LosState, tuple[float, float]] = {}
    for cond, mask in ((LosState.LOS, is_los), (LosState.NLOS, ~is_los)):
        if not np.any(mask):
            results[cond] = None
            continue
        h = trace.altitudes_m[mask]
        y = compensated[mask]
        if np.unique(h).size < 2:
            raise FitError(f"{cond.value} samples cover a single altitude; slope is unidentifiable")
        if mode is FitMode.FREE_INTERCEPTS:
            design = np.column_stack([np.ones_like(h), -h])
            coef, *_ = np.linalg.lstsq(design, y, rcond=None)
            intercept, n = float(coef[0]), float(coef[1])
        else:
            intercept = reference.intercept(cond)
            n = float(np.dot(intercept - y, h) / np.dot(h, h))
        resid = y - (intercept - n * h)
        results[cond] = ConditionFit(
            intercept_db=intercept,
            altitude_factor=n,
            residual_rms_db=float(np.sqrt(np.mean(resid**2))),
            n_samples=int(mask.sum()),
        )
        fitted[cond] = (intercept, n)

    los_fit = fitted.get(LosState.LOS, (reference.intercept_los_db, reference.n_los))
    nlos_fit = fitted.get(LosState.NLOS, (reference.intercept_nlos_db, reference.n_nlos))
    params = PathLossParams(
        intercept_los_db=los_fit[0],
        intercept_nlos_db=nlos_fit[0],
        dist_coeff=reference.dist_coeff,
        freq_coeff=reference.freq_coeff,
        n_los=max(los_fit[1], 0.0),
        n_nlos=max(nlos_fit[1], 0.0),
    )
    return PathLossFit(params=params, mode=mode, los=results[LosState.LOS], nlos=results[LosState.NLOS])


def model_curve(trace: Trace, params: PathLossParams) -> np.ndarray:
    """Altitude-model prediction evaluated at every trace sample."""
    base = (
        params.dist_coeff * np.log10(trace.d3d_m())
        + params.freq_coeff * math.log10(trace.freq.ghz)
    )
    is_los = trace.los()
    intercept = np.where(is_los, params.intercept_los_db, params.intercept_nlos_db)
    slope = np.where(is_los, params.n_los, params.n_nlos)
    return base + intercept - slope * trace.altitudes_m


@dataclass(frozen=True)
class Decomposition:
    """Per-sample separation of a trace into trend, shadowing and fast fading."""

    trace: Trace
    fit: PathLossFit
    pl0_fit: np.ndarray
    sf: np.ndarray
    ff: np.ndarray
    ff_analysis: np.ndarray
    large_scale: np.ndarray
    stat_mask: np.ndarray = field(repr=False)

    def reconstruction(self) -> np.ndarray:
        return self.pl0_fit + self.sf + self.ff


def _stat_mask(trace: Trace, half_width: int) -> np.ndarray:
    """Samples kept for the shadowing/fading statistics pools.

    A guard band of a quarter trend window around the LOS transition is
    dropped: there the window mixes the two conditions, whose fading laws
    differ.  Edge samples stay; the shrinking window is applied to trace and
    model curve alike, so its bias cancels in the fading series.
    """
    mask = np.ones(len(trace), dtype=bool)
    if half_width > 0:
        h_t = los_transition_altitude(trace.scenario)
        guard = 0.5 * half_width / trace.spatial_resolution
        mask &= np.abs(trace.altitudes_m - h_t) > guard
    return mask


def decompose(trace: Trace, mode: FitMode = FitMode.FREE_INTERCEPTS) -> Decomposition:
    """Split a trace into fitted trend, shadow fading and fast fading."""
    fit = fit_altitude_model(trace, mode)
    model = trace.with_loss(model_curve(trace, fit.params))

    large = local_mean(trace, TREND_WINDOW_WAVELENGTHS).loss_db
    small = local_mean(trace, FADING_WINDOW_WAVELENGTHS).loss_db
    model_large = local_mean(model, TREND_WINDOW_WAVELENGTHS).loss_db
    model_small = local_mean(model, FADING_WINDOW_WAVELENGTHS).loss_db

    sf = large - model_large
    ff = trace.loss_db - large
    # fading-window smoothed fast fading, with the model curve's own window
    # response removed so a deterministic trace decomposes to exactly zero
    ff_analysis = (small - large) - (model_small - model_large)

    return Decomposition(
        trace=trace,
        fit=fit,
        pl0_fit=model_large,
        sf=sf,
        ff=ff,
        ff_analysis=ff_analysis,
        large_scale=large,
        stat_mask=_stat_mask(trace, _window_half_width(trace, TREND_WINDOW_WAVELENGTHS)),
    )


@dataclass(frozen=True)
class ShadowingFit:
    params: ShadowingParams
    max_abs_db: float
    n_samples: int


def fit_gaussian(sf_samples) -> ShadowingFit:
    """Sample mean and unbiased standard deviation of shadow-fading values."""
    sf = np.asarray(sf_samples, dtype=float)
    if sf.size < 2:
        raise ValueError("need at least two shadowing samples")
    sigma = float(np.std(sf, ddof=1))
    return ShadowingFit(
        params=ShadowingParams(sigma_db=sigma, mean_db=float(np.mean(sf))),
        max_abs_db=float(np.max(np.abs(sf))),
        n_samples=int(sf.size),
    )


MIN_MLE_SAMPLES = 50
_LL_CONVERGENCE_TOL = 1e-8


def _check_envelopes(samples) -> np.ndarray:
    x = np.asarray(samples, dtype=float)
    if np.any(x <= 0):
        raise ValueError("envelope samples must be positive")
    if x.size < MIN_MLE_SAMPLES:
        raise ValueError(f"need at least {MIN_MLE_SAMPLES} envelope samples")
    if np.ptp(x) == 0:
        raise FitError("degenerate constant samples; likelihood is unbounded")
    return x


def _fit_loglogistic(x: np.ndarray) -> LogLogisticParams:
    # log of a log-logistic envelope is logistic(mu=log alpha, s=1/beta)
    y = np.log(x)
    mu0 = float(np.median(y))
    s0 = max(float(np.std(y)) * math.sqrt(3.0) / math.pi, 1e-6)

    def nll(theta):
        mu, log_s = theta
        s = math.exp(log_s)
        z = (y - mu) / s
        return float(np.sum(z + 2.0 * np.logaddexp(0.0, -z)) + y.size * log_s)

    best = None
    for start in ((mu0, math.log(s0)), (mu0, math.log(2.0 * s0)), (0.0, math.log(s0))):
        res = optimize.minimize(
            nll, start, method="Nelder-Mead",
            options={"xatol": 1e-9, "fatol": _LL_CONVERGENCE_TOL, "maxiter": 2000},
        )
        if best is None or res.fun < best.fun:
            best = res
    if best is None or not np.isfinite(best.fun):
        raise FitError("log-logistic likelihood optimization failed to converge")
    mu, log_s = best.x
    return LogLogisticParams(alpha=math.exp(mu), beta=1.0 / math.exp(log_s))


def _fit_rayleigh(x: np.ndarray) -> RayleighParams:
    return RayleighParams(scale=math.sqrt(float(np.mean(x**2)) / 2.0))


def _fit_weibull(x: np.ndarray) -> WeibullParams:
    # profile likelihood: shape solves the classical fixed-point condition,
    # then scale follows in closed form
    logx = np.log(x)
    mean_log = float(np.mean(logx))

    def profile_eq(k):
        xk = x**k
        return float(np.dot(xk, logx) / np.sum(xk) - 1.0 / k - mean_log)

    k0 = 1.2 / max(float(np.std(logx)), 1e-9)  # moment start
    lo, hi = k0 / 8.0, k0 * 8.0
    flo, fhi = profile_eq(lo), profile_eq(hi)
    for _ in range(60):
        if flo * fhi <= 0:
            break
        lo, hi = lo / 2.0, hi * 2.0
        flo, fhi = profile_eq(lo), profile_eq(hi)
    else:
        raise FitError("Weibull profile likelihood could not be bracketed")
    k = optimize.brentq(profile_eq, lo, hi, xtol=1e-12)
    scale = float(np.mean(x**k)) ** (1.0 / k)
    return WeibullParams(scale=scale, shape=k)


def _fit_nakagami(x: np.ndarray) -> NakagamiParams:
    # omega MLE is E[x^2]; m solves log(m) - digamma(m) = log(omega) - E[log x^2]
    omega = float(np.mean(x**2))
    target = math.log(omega) - float(np.mean(np.log(x**2)))
    if target <= 0:
        raise FitError("Nakagami shape equation has no positive solution")

    def shape_eq(m):
        return math.log(m) - special.digamma(m) - target

    lo, hi = 1e-2, 1e2
    flo, fhi = shape_eq(lo), shape_eq(hi)
    for _ in range(40):
        if flo * fhi <= 0:
            break
        lo, hi = lo / 4.0, hi * 4.0
        flo, fhi = shape_eq(lo), shape_eq(hi)
    else:
        raise FitError("Nakagami shape equation could not be bracketed")
    m = optimize.brentq(shape_eq, lo, hi, xtol=1e-12)
    return NakagamiParams(m=m, omega=omega)


def _fit_rician(x: np.ndarray) -> RicianParams:
    m2 = float(np.mean(x**2))

    def nll(theta):
        log_nu, log_sigma = theta
        dist = RicianParams(nu=math.exp(log_nu), sigma=math.exp(log_sigma))
        return -float(np.sum(dist.log_pdf(x)))

    sigma_ray = math.sqrt(m2 / 2.0)
    starts = [
        (math.log(0.05 * sigma_ray), math.log(sigma_ray)),  # near-Rayleigh
        (math.log(math.sqrt(m2 * 0.75)), math.log(math.sqrt(m2 / 8.0))),  # strong line of sight
    ]
    best = None
    for start in starts:
        res = optimize.minimize(
            nll, start, method="Nelder-Mead",
            options={"xatol": 1e-9, "fatol": _LL_CONVERGENCE_TOL, "maxiter": 2000},
        )
        if best is None or res.fun < best.fun:
            best = res
    if best is None or not np.isfinite(best.fun):
        raise FitError("Rician likelihood optimization failed to converge")
    nu, sigma = math.exp(best.x[0]), math.exp(best.x[1])
    if nu < 1e-6 * sigma:  # collapse to the Rayleigh boundary
        nu = 0.0
    return RicianParams(nu=nu, sigma=sigma)


_FITTERS = {
    Family.LOG_LOGISTIC: _fit_loglogistic,
    Family.RAYLEIGH: _fit_rayleigh,
    Family.WEIBULL: _fit_weibull,
    Family.NAKAGAMI_M: _fit_nakagami,
    Family.RICIAN: _fit_rician,
}


def fit_mle(envelope_samples, family: Family) -> tuple[FadingDistribution, float]:
    """Maximum-likelihood fit of one envelope family; returns (distribution, log-likelihood)."""
    x = _check_envelopes(envelope_samples)
    dist = _FITTERS[family](x)
    return dist, float(np.sum(dist.log_pdf(x)))


@dataclass(frozen=True)
class FadingFit:
    dist: FadingDistribution
    log_likelihood: float

    @property
    def family(self) -> Family:
        return self.dist.family


def select_distribution(envelope_samples, families=None) -> list[FadingFit]:
    """Fit candidate envelope families and rank by log-likelihood (descending).

    Ties break toward fewer parameters, then the fixed family order.
    """
    families = tuple(families) if families is not None else FAMILY_ORDER
    fits = []
    for family in families:
        dist, ll = fit_mle(envelope_samples, family)
        fits.append(FadingFit(dist=dist, log_likelihood=ll))
    fits.sort(key=lambda f: (-f.log_likelihood, len(f.dist.params), FAMILY_ORDER.index(f.family)))
    return fits


@dataclass(frozen=True)
class ConditionReport:
    shadowing: ShadowingFit
    fading: list[FadingFit]
    fading_depth_db: float
    ff_percentile_1_db: float
    ff_percentile_50_db: float
    ff_max_db: float
    ff_min_db: float
    ff_max_abs_db: float
    n_samples: int
    n_stat_samples: int


@dataclass(frozen=True)
class FitReport:
    """Everything the inverse pipeline recovers from one trace."""

    pathloss: PathLossFit
    conditions: dict[LosState, ConditionReport]

    def condition(self, los: LosState) -> ConditionReport | None:
        return self.conditions.get(los)


def _condition_report(decomp: Decomposition, mask: np.ndarray, families) -> ConditionReport:
    pool = mask & decomp.stat_mask
    if pool.sum() < max(MIN_MLE_SAMPLES, 2):
        raise FitError("too few interior samples in one LOS condition for statistics")
    sf = decomp.sf[pool]
    ff = decomp.ff_analysis[pool]
    fits = select_distribution(db_to_envelope(ff), families)
    return ConditionReport(
        shadowing=fit_gaussian(sf),
        fading=fits,
        fading_depth_db=fading_depth(ff),
        ff_percentile_1_db=percentile(ff, 1.0),
        ff_percentile_50_db=percentile(ff, 50.0),
        ff_max_db=float(np.max(ff)),
        ff_min_db=float(np.min(ff)),
        ff_max_abs_db=float(np.max(np.abs(ff))),
        n_samples=int(mask.sum()),
        n_stat_samples=int(pool.sum()),
    )


def analyze_decomposition(decomp: Decomposition, families=None) -> FitReport:
    """Fit per-condition statistics on an existing decomposition."""
    is_los = decomp.trace.los()
    conditions: dict[LosState, ConditionReport] = {}
    for cond, mask in ((LosState.LOS, is_los), (LosState.NLOS, ~is_los)):
        if not np.any(mask):
            continue
        conditions[cond] = _condition_report(decomp, mask, families)
    return FitReport(pathloss=decomp.fit, conditions=conditions)


def analyze_trace(
    trace: Trace,
    mode: FitMode = FitMode.FREE_INTERCEPTS,
    families=None,
) -> FitReport:
    """Run the full inverse pipeline and assemble a FitReport."""
    return analyze_decomposition(decompose(trace, mode), families)
