"""Noise-uncertainty factor ``beta = nominal / true`` noise power.

``beta`` is uniform in decibels on ``[-L, L]``, so its density in linear units
is ``5 / (ln(10) * L * x)`` on ``[10^(-L/10), 10^(L/10)]``. ``L = 0`` is a
point mass at ``beta = 1``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DegenerateDistributionError, DomainError

LN10 = math.log(10.0)


@dataclass(frozen=True)
class UncertaintyBound:
    L_dB: float = 0.0

    def __post_init__(self):
        L = float(self.L_dB)
        if not math.isfinite(L) or L < 0.0:
            raise DomainError(f"uncertainty bound must be finite and >= 0 dB, got {self.L_dB!r}")
        object.__setattr__(self, "L_dB", L)

    @property
    def degenerate(self):
        return self.L_dB == 0.0


def _as_bound(bound):
    if isinstance(bound, UncertaintyBound):
        return bound
    return UncertaintyBound(bound)


def beta_bounds(bound):
    """Support ``(a, b)`` of ``beta``; ``a * b == 1``."""
    L = _as_bound(bound).L_dB
    return 10.0 ** (-L / 10.0), 10.0 ** (L / 10.0)


def beta_pdf(x, bound):
    bound = _as_bound(bound)
    if bound.degenerate:
        raise DegenerateDistributionError("L_dB = 0 is a point mass at beta = 1; it has no density")
    a, b = beta_bounds(bound)
    x = float(x)
    if a < x < b:
        return 5.0 / (LN10 * bound.L_dB * x)
    return 0.0


def beta_cdf(x, bound):
    bound = _as_bound(bound)
    a, b = beta_bounds(bound)
    x = float(x)
    if bound.degenerate:
        return 1.0 if x >= 1.0 else 0.0
    if x <= a:
        return 0.0
    if x >= b:
        return 1.0
    return 5.0 * math.log(x / a) / (bound.L_dB * LN10)


def sample_beta(bound, rng, size=None):
    """Draw ``beta`` by inverse transform in the dB domain.

    ``L_dB = 0`` returns exactly 1 without consuming the stream.
    """
    L = _as_bound(bound).L_dB
    if L == 0.0:
        return 1.0 if size is None else np.ones(size)
    u = rng.uniform(-L, L, size)
    return 10.0 ** (u / 10.0)
