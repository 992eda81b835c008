"""Single-sensor generalized energy detector under noise uncertainty.

The statistic ``T = (1/N) sum |y(n)|^p`` is treated as Gaussian (CLT) with the
moments below. Thresholds are always given in normalized form ``lam``; the
actual threshold is ``lam * nominal_noise_power ** (p / 2)``, which makes
every probability here independent of the nominal noise power.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np

from ._jit import njit
from .errors import ConvergenceError, DomainError
from .numerics import (
    DEFAULT_QUADRATURE,
    adaptive_simpson,
    g_p,
    k_p,
    q_tail,
)
from .uncertainty import UncertaintyBound

CLT_MIN_SAMPLES = 100


class CLTWarning(UserWarning):
    """Gaussian approximation of the statistic is doubtful for small N."""


@dataclass(frozen=True)
class DetectorParams:
    p: float = 2.0
    N: int = 1000

    def __post_init__(self):
        p = float(self.p)
        if not p > 0.0 or not math.isfinite(p):
            raise DomainError(f"exponent p must be finite and > 0, got {self.p!r}")
        if int(self.N) != self.N or self.N < 1:
            raise DomainError(f"sample count N must be an integer >= 1, got {self.N!r}")
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "N", int(self.N))
        if self.N < CLT_MIN_SAMPLES:
            warnings.warn(
                f"N={self.N} < {CLT_MIN_SAMPLES}: Gaussian approximation may be inaccurate",
                CLTWarning,
                stacklevel=3,
            )

    @property
    def half_p(self):
        return 0.5 * self.p

    def scale(self):
        """``sqrt(N / K_p)``, the inverse standard deviation at unit noise."""
        return math.sqrt(self.N / k_p(self.p))


@dataclass(frozen=True)
class SensorProfile:
    """One cooperating sensor: uncertainty bound, average SNR, nominal noise power.

    ``snr`` is linear and relative to the nominal noise power, so the primary
    signal power is ``snr * nominal_noise_power``.
    """

    bound: UncertaintyBound = field(default_factory=UncertaintyBound)
    snr: float = 0.0
    nominal_noise_power: float = 1.0

    def __post_init__(self):
        if not isinstance(self.bound, UncertaintyBound):
            object.__setattr__(self, "bound", UncertaintyBound(self.bound))
        snr = float(self.snr)
        if not math.isfinite(snr) or snr < 0.0:
            raise DomainError(f"snr must be finite and >= 0, got {self.snr!r}")
        power = float(self.nominal_noise_power)
        if not math.isfinite(power) or power <= 0.0:
            raise DomainError(f"nominal noise power must be > 0, got {self.nominal_noise_power!r}")
        object.__setattr__(self, "snr", snr)
        object.__setattr__(self, "nominal_noise_power", power)

    @property
    def L_dB(self):
        return self.bound.L_dB


@dataclass(frozen=True)
class GaussianMoments:
    mean: float
    variance: float

    @property
    def std(self):
        return math.sqrt(self.variance)


def _check_power(noise_power):
    noise_power = float(noise_power)
    if not noise_power > 0.0:
        raise DomainError(f"noise power must be > 0, got {noise_power!r}")
    return noise_power


def moments_h0(params, noise_power):
    noise_power = _check_power(noise_power)
    sp = noise_power ** params.half_p
    return GaussianMoments(g_p(params.p) * sp, k_p(params.p) / params.N * sp * sp)


def moments_h1(params, noise_power, beta, snr):
    noise_power = _check_power(noise_power)
    if not beta > 0.0:
        raise DomainError(f"beta must be > 0, got {beta!r}")
    if snr < 0.0:
        raise DomainError(f"snr must be >= 0, got {snr!r}")
    sp = ((1.0 + beta * snr) * noise_power) ** params.half_p
    return GaussianMoments(g_p(params.p) * sp, k_p(params.p) / params.N * sp * sp)


def pf_fixed(lam, beta, params):
    """False-alarm probability for a known ``beta``."""
    if not beta > 0.0:
        raise DomainError(f"beta must be > 0, got {beta!r}")
    h = params.half_p
    return q_tail((lam * beta**h - g_p(params.p)) * params.scale())


def pd_fixed(lam, beta, snr, params):
    """Detection probability for a known ``beta``."""
    if not beta > 0.0:
        raise DomainError(f"beta must be > 0, got {beta!r}")
    if snr < 0.0:
        raise DomainError(f"snr must be >= 0, got {snr!r}")
    h = params.half_p
    m = (1.0 + beta * snr) ** h
    return q_tail((lam * beta**h - g_p(params.p) * m) / m * params.scale())


# Integrands in the dB variable u, beta = 10^(u/10). The uniform density
# 1/(2L) in u is applied by the caller.
# prm = [lam, G_p, sqrt(N/K_p), p/2, snr]


@njit
def _pf_integrand(u, prm):
    beta = 10.0 ** (u / 10.0)
    return q_tail((prm[0] * beta ** prm[3] - prm[1]) * prm[2])


@njit
def _pd_integrand(u, prm):
    beta = 10.0 ** (u / 10.0)
    m = (1.0 + beta * prm[4]) ** prm[3]
    return q_tail((prm[0] * beta ** prm[3] - prm[1] * m) / m * prm[2])


@njit
def average_single(detect, lam, g, s, h, snr, L, tol, max_depth, panels):
    """Average of the fixed-beta probability over ``u ~ U[-L, L]``."""
    prm = np.empty(5)
    prm[0] = lam
    prm[1] = g
    prm[2] = s
    prm[3] = h
    prm[4] = snr
    width = 2.0 * L
    if detect:
        v, ok = adaptive_simpson(_pd_integrand, prm, -L, L, tol * width, max_depth, panels)
    else:
        v, ok = adaptive_simpson(_pf_integrand, prm, -L, L, tol * width, max_depth, panels)
    return v / width, ok


def _average(detect, lam, bound, snr, params, quad):
    if not isinstance(bound, UncertaintyBound):
        bound = UncertaintyBound(bound)
    if bound.degenerate:
        if detect:
            return pd_fixed(lam, 1.0, snr, params)
        return pf_fixed(lam, 1.0, params)
    value, ok = average_single(
        detect,
        float(lam),
        g_p(params.p),
        params.scale(),
        params.half_p,
        float(snr),
        bound.L_dB,
        quad.abs_tol,
        quad.max_depth,
        quad.panels,
    )
    if not ok:
        raise ConvergenceError(f"averaging over beta did not converge at lambda={lam}", value)
    return min(max(value, 0.0), 1.0)


def pf_avg(lam, bound, params, quad=DEFAULT_QUADRATURE):
    """False-alarm probability averaged over the noise-uncertainty law."""
    return _average(False, lam, bound, 0.0, params, quad)


def pd_avg(lam, bound, snr, params, quad=DEFAULT_QUADRATURE):
    """Detection probability averaged over the noise-uncertainty law."""
    if snr < 0.0:
        raise DomainError(f"snr must be >= 0, got {snr!r}")
    return _average(True, lam, bound, snr, params, quad)
