"""Shadowing and fast-fading distributions.

Shadowing lives in the dB domain (zero-mean Gaussian with standard deviation
sigma, the shadowing factor).  Fast fading is described by its linear
envelope; the dB fading term used when composing a loss trace is
20*log10(envelope), so a median-1 envelope gives a zero-median dB term.

Envelope families and their parameterizations (all support x >= 0):

  LogLogistic(alpha, beta):
      pdf = (beta/alpha) (x/alpha)^(beta-1) / (1 + (x/alpha)^beta)^2
      cdf = 1 / (1 + (x/alpha)^-beta); alpha is the median, beta the shape.
  Rayleigh(scale):
      pdf = (x/scale^2) exp(-x^2 / (2 scale^2))
  Rician(nu, sigma):
      pdf = (x/sigma^2) exp(-(x^2+nu^2)/(2 sigma^2)) I0(x nu / sigma^2);
      K factor = nu^2 / (2 sigma^2); nu = 0 reduces to Rayleigh(sigma).
  NakagamiM(m, omega):
      pdf = 2 m^m x^(2m-1) / (Gamma(m) omega^m) exp(-m x^2 / omega);
      m = 1 reduces to Rayleigh(sqrt(omega/2)).
  Weibull(scale, shape):
      pdf = (shape/scale) (x/scale)^(shape-1) exp(-(x/scale)^shape);
      shape = 2 reduces to Rayleigh(scale/sqrt(2)).

Empirical percentiles throughout the toolkit interpolate linearly between
order statistics (the rank of the p-th percentile is (n-1)*p/100).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import special, stats


class Family(Enum):
    LOG_LOGISTIC = "loglogistic"
    RICIAN = "rician"
    RAYLEIGH = "rayleigh"
    NAKAGAMI_M = "nakagami-m"
    WEIBULL = "weibull"


@dataclass(frozen=True)
class ShadowingParams:
    """Gaussian dB-domain shadowing: mean (usually 0) and shadowing factor sigma."""

    sigma_db: float
    mean_db: float = 0.0

    def __post_init__(self):
        if self.sigma_db < 0:
            raise ValueError("shadowing sigma must be nonnegative")


def sample_shadowing(rng: np.random.Generator, params: ShadowingParams, size=None):
    """Draw shadowing values in dB."""
    if params.sigma_db == 0:
        return 0.0 if size is None else np.zeros(size)
    return rng.normal(params.mean_db, params.sigma_db, size=size)


def _check_x(x):
    x = np.asarray(x, dtype=float)
    if np.any(x < 0):
        raise ValueError("envelope values must be nonnegative")
    return x


def _check_u(u):
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0) or np.any(u >= 1):
        raise ValueError("probability must lie strictly inside (0, 1)")
    return u


def _scalarize(out, *inputs):
    return float(out) if all(np.ndim(v) == 0 for v in inputs) else out


@dataclass(frozen=True)
class LogLogisticParams:
    """Scale alpha (the distribution median) and shape beta."""

    alpha: float
    beta: float

    def __post_init__(self):
        if self.alpha <= 0 or self.beta <= 0:
            raise ValueError("log-logistic parameters must be positive")

    family = Family.LOG_LOGISTIC

    @property
    def params(self) -> tuple[float, ...]:
        return (self.alpha, self.beta)

    def pdf(self, x):
        x = _check_x(x)
        r = x / self.alpha
        with np.errstate(divide="ignore", invalid="ignore"):
            out = (self.beta / self.alpha) * r ** (self.beta - 1.0) / (1.0 + r**self.beta) ** 2
        # x = 0: density is beta/alpha for beta == 1, 0 for beta > 1, inf for beta < 1
        if self.beta > 1:
            out = np.where(x == 0, 0.0, out)
        elif self.beta == 1:
            out = np.where(x == 0, 1.0 / self.alpha, out)
        return _scalarize(out, x)

    def cdf(self, x):
        x = _check_x(x)
        with np.errstate(divide="ignore"):
            out = np.where(x == 0, 0.0, 1.0 / (1.0 + (x / self.alpha) ** -self.beta))
        return _scalarize(out, x)

    def quantile(self, u):
        u = _check_u(u)
        out = self.alpha * (u / (1.0 - u)) ** (1.0 / self.beta)
        return _scalarize(out, u)

    def sample(self, rng: np.random.Generator, size=None):
        return self.quantile(rng.random(size=size))

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise ValueError("log density requires positive envelopes")
        logr = np.log(x / self.alpha)
        return (
            math.log(self.beta / self.alpha)
            + (self.beta - 1.0) * logr
            - 2.0 * np.logaddexp(0.0, self.beta * logr)
        )


@dataclass(frozen=True)
class RayleighParams:
    scale: float

    def __post_init__(self):
        if self.scale <= 0:
            raise ValueError("Rayleigh scale must be positive")

    family = Family.RAYLEIGH

    @property
    def params(self) -> tuple[float, ...]:
        return (self.scale,)

    def pdf(self, x):
        x = _check_x(x)
        s2 = self.scale**2
        out = x / s2 * np.exp(-(x**2) / (2.0 * s2))
        return _scalarize(out, x)

    def cdf(self, x):
        x = _check_x(x)
        out = -np.expm1(-(x**2) / (2.0 * self.scale**2))
        return _scalarize(out, x)

    def quantile(self, u):
        u = _check_u(u)
        out = self.scale * np.sqrt(-2.0 * np.log1p(-u))
        return _scalarize(out, u)

    def sample(self, rng: np.random.Generator, size=None):
        return self.quantile(rng.random(size=size))

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise ValueError("log density requires positive envelopes")
        return np.log(x) - 2.0 * math.log(self.scale) - x**2 / (2.0 * self.scale**2)


@dataclass(frozen=True)
class RicianParams:
    """Noncentrality nu >= 0 and scale sigma; K = nu^2 / (2 sigma^2)."""

    nu: float
    sigma: float

    def __post_init__(self):
        if self.nu < 0 or self.sigma <= 0:
            raise ValueError("Rician requires nu >= 0 and sigma > 0")

    family = Family.RICIAN

    @property
    def params(self) -> tuple[float, ...]:
        return (self.nu, self.sigma)

    @property
    def k_factor(self) -> float:
        return self.nu**2 / (2.0 * self.sigma**2)

    def pdf(self, x):
        x = _check_x(x)
        s2 = self.sigma**2
        # i0e keeps the Bessel factor bounded: i0e(z) = exp(-z) I0(z)
        out = x / s2 * np.exp(-((x - self.nu) ** 2) / (2.0 * s2)) * special.i0e(x * self.nu / s2)
        return _scalarize(out, x)

    def cdf(self, x):
        x = _check_x(x)
        out = stats.rice.cdf(x, self.nu / self.sigma, scale=self.sigma)
        return _scalarize(out, x)

    def quantile(self, u):
        u = _check_u(u)
        out = stats.rice.ppf(u, self.nu / self.sigma, scale=self.sigma)
        return _scalarize(out, u)

    def sample(self, rng: np.random.Generator, size=None):
        # envelope of a complex Gaussian with mean nu
        re = rng.normal(self.nu, self.sigma, size=size)
        im = rng.normal(0.0, self.sigma, size=size)
        return np.hypot(re, im)

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise ValueError("log density requires positive envelopes")
        s2 = self.sigma**2
        z = x * self.nu / s2
        return np.log(x) - math.log(s2) - (x - self.nu) ** 2 / (2.0 * s2) + np.log(special.i0e(z))


@dataclass(frozen=True)
class NakagamiParams:
    """Shape m and spread omega = E[x^2]."""

    m: float
    omega: float

    def __post_init__(self):
        if self.m <= 0 or self.omega <= 0:
            raise ValueError("Nakagami parameters must be positive")

    family = Family.NAKAGAMI_M

    @property
    def params(self) -> tuple[float, ...]:
        return (self.m, self.omega)

    def pdf(self, x):
        x = _check_x(x)
        with np.errstate(divide="ignore", invalid="ignore"):
            out = np.exp(self.log_pdf(np.where(x > 0, x, 1.0)))
        if self.m > 0.5:
            out = np.where(x == 0, 0.0, out)
        return _scalarize(out, x)

    def cdf(self, x):
        x = _check_x(x)
        out = special.gammainc(self.m, self.m * x**2 / self.omega)
        return _scalarize(out, x)

    def quantile(self, u):
        u = _check_u(u)
        out = np.sqrt(special.gammaincinv(self.m, u) * self.omega / self.m)
        return _scalarize(out, u)

    def sample(self, rng: np.random.Generator, size=None):
        return np.sqrt(rng.gamma(self.m, self.omega / self.m, size=size))

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise ValueError("log density requires positive envelopes")
        m, om = self.m, self.omega
        return (
            math.log(2.0)
            + m * math.log(m / om)
            - special.gammaln(m)
            + (2.0 * m - 1.0) * np.log(x)
            - m * x**2 / om
        )


@dataclass(frozen=True)
class WeibullParams:
    scale: float
    shape: float

    def __post_init__(self):
        if self.scale <= 0 or self.shape <= 0:
            raise ValueError("Weibull parameters must be positive")

    family = Family.WEIBULL

    @property
    def params(self) -> tuple[float, ...]:
        return (self.scale, self.shape)

    def pdf(self, x):
        x = _check_x(x)
        r = x / self.scale
        with np.errstate(divide="ignore", invalid="ignore"):
            out = self.shape / self.scale * r ** (self.shape - 1.0) * np.exp(-(r**self.shape))
        if self.shape > 1:
            out = np.where(x == 0, 0.0, out)
        elif self.shape == 1:
            out = np.where(x == 0, 1.0 / self.scale, out)
        return _scalarize(out, x)

    def cdf(self, x):
        x = _check_x(x)
        out = -np.expm1(-((x / self.scale) ** self.shape))
        return _scalarize(out, x)

    def quantile(self, u):
        u = _check_u(u)
        out = self.scale * (-np.log1p(-u)) ** (1.0 / self.shape)
        return _scalarize(out, u)

    def sample(self, rng: np.random.Generator, size=None):
        return self.quantile(rng.random(size=size))

    def log_pdf(self, x):
        x = np.asarray(x, dtype=float)
        if np.any(x <= 0):
            raise ValueError("log density requires positive envelopes")
        logr = np.log(x / self.scale)
        return math.log(self.shape / self.scale) + (self.shape - 1.0) * logr - np.exp(self.shape * logr)


# Any of the five envelope distributions.
FadingDistribution = (
    LogLogisticParams | RayleighParams | RicianParams | NakagamiParams | WeibullParams
)

FAMILY_ORDER: tuple[Family, ...] = (
    Family.LOG_LOGISTIC,
    Family.RICIAN,
    Family.RAYLEIGH,
    Family.NAKAGAMI_M,
    Family.WEIBULL,
)


def sample_envelope(rng: np.random.Generator, dist: FadingDistribution, size=None):
    """Draw linear envelope values from a fading distribution."""
    return dist.sample(rng, size=size)


def envelope_to_db(envelope):
    """Fast-fading dB term of an envelope: 20*log10(envelope)."""
    envelope = np.asarray(envelope, dtype=float)
    if np.any(envelope <= 0):
        raise ValueError("envelope must be positive to convert to dB")
    out = 20.0 * np.log10(envelope)
    return _scalarize(out, envelope)


def db_to_envelope(ff_db):
    ff_db = np.asarray(ff_db, dtype=float)
    out = 10.0 ** (ff_db / 20.0)
    return _scalarize(out, ff_db)


def percentile(samples, p: float) -> float:
    """Empirical percentile with linear interpolation between order statistics."""
    samples = np.asarray(samples, dtype=float)
    if samples.size == 0:
        raise ValueError("percentile of empty sample set")
    return float(np.percentile(samples, p))


def fading_depth(ff_db_samples) -> float:
    """Spread between the median and the deep-fade tail of a dB series.

    Returns L50 - L1 where Lp is the empirical p-th percentile; nonnegative
    for any input.  Fewer than 200 samples leave the 1% tail poorly
    resolved, which only warns.
    """
    ff_db_samples = np.asarray(ff_db_samples, dtype=float)
    if ff_db_samples.size == 0:
        raise ValueError("fading depth of empty sample set")
    if ff_db_samples.size < 200:
        warnings.warn("fewer than 200 samples; the 1% percentile is poorly resolved")
    return percentile(ff_db_samples, 50.0) - percentile(ff_db_samples, 1.0)
