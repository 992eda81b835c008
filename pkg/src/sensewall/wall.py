"""SNR walls and asymptotic threshold feasibility.

As ``N -> inf`` a sensor's averaged false-alarm probability vanishes iff
``lam >= G_p * b_i^(p/2)`` and its detection probability tends to one iff
``lam <= G_p * (a_i + snr_i)^(p/2)``, with ``(a_i, b_i)`` the support of
``beta_i``. Every wall below follows from combining those endpoints under the
fusion rule; the hard-rule walls contain no ``p``.
"""

from dataclasses import dataclass
import math

import numpy as np

from .errors import DomainError, RuleMismatchError, UnsupportedClosedFormError
from .fusion import FusionRule, network_qd, network_qf
from .numerics import DEFAULT_QUADRATURE, g_p
from .uncertainty import UncertaintyBound, beta_bounds


@dataclass(frozen=True)
class WallReport:
    rule: FusionRule
    per_sensor_walls: tuple | None = None
    sum_wall: float | None = None
    required_count: int | None = None

    def satisfied_by(self, snrs):
        """Whether the given linear SNRs clear the wall (``>=`` is enough)."""
        if self.sum_wall is not None:
            return math.fsum(snrs) >= self.sum_wall
        met = sum(g >= w for g, w in zip(snrs, self.per_sensor_walls))
        return met >= self.required_count


@dataclass(frozen=True)
class LambdaInterval:
    lo: float
    hi: float

    @property
    def feasible(self):
        return self.lo <= self.hi

    @property
    def midpoint(self):
        return 0.5 * (self.lo + self.hi)

    def __contains__(self, lam):
        return self.lo <= lam <= self.hi


def _levels(bounds):
    out = []
    for b in bounds:
        out.append(b.L_dB if isinstance(b, UncertaintyBound) else UncertaintyBound(b).L_dB)
    if not out:
        raise DomainError("at least one uncertainty bound is required")
    return out


def _hard_k(rule, M):
    if not rule.is_hard:
        raise RuleMismatchError("soft_egc has no per-sensor wall; use wall_soft")
    k = rule.required_count(M)
    if not 1 <= k <= M:
        raise DomainError(f"k={k} out of range for M={M}")
    return k


def _kth_largest(values, k):
    return sorted(values, reverse=True)[k - 1]


def wall_hard(bounds, rule):
    """Per-sensor walls ``10^(L+/10) - 10^(-L_i/10)`` for a hard rule.

    ``L+`` is the k-th largest bound (max for OR, min for AND).
    """
    Ls = _levels(bounds)
    k = _hard_k(rule, len(Ls))
    top = 10.0 ** (_kth_largest(Ls, k) / 10.0)
    walls = tuple(top - 10.0 ** (-L / 10.0) for L in Ls)
    return WallReport(rule, per_sensor_walls=walls, required_count=k)


def wall_equal_snr(bounds, rule):
    """Wall on a common SNR shared by every sensor under a hard rule."""
    Ls = _levels(bounds)
    k = _hard_k(rule, len(Ls))
    upper = _kth_largest(Ls, k)
    lower = sorted(Ls)[k - 1]
    return 10.0 ** (upper / 10.0) - 10.0 ** (-lower / 10.0)


def wall_soft(bounds):
    """Required total SNR for equal-gain soft combining (closed form at p = 2)."""
    Ls = _levels(bounds)
    return math.fsum(10.0 ** (L / 10.0) - 10.0 ** (-L / 10.0) for L in Ls)


def wall_report(config):
    """The wall matching ``config.rule``."""
    bounds = [s.bound for s in config.sensors]
    if config.rule.is_hard:
        return wall_hard(bounds, config.rule)
    return WallReport(config.rule, sum_wall=wall_soft(bounds))


def sensor_endpoints(config):
    """Per-sensor asymptotic ``(false_alarm_lo, detection_hi)`` lambda bounds."""
    g = g_p(config.params.p)
    h = config.params.half_p
    out = []
    for s in config.sensors:
        a, b = beta_bounds(s.bound)
        out.append((g * b**h, g * (a + s.snr) ** h))
    return out


def feasible_lambda(config):
    """Asymptotic interval of normalized thresholds giving unlimited reliability."""
    if config.rule.is_hard:
        k = config.required_count
        ends = sensor_endpoints(config)
        lo = _kth_largest([e[0] for e in ends], k)
        hi = _kth_largest([e[1] for e in ends], k)
        return LambdaInterval(lo, hi)
    if config.params.p != 2.0:
        raise UnsupportedClosedFormError(
            f"soft-combining threshold interval has a closed form only for p=2 (got p={config.params.p}); "
            "use reliability_search on a numeric sweep"
        )
    g = g_p(2.0)
    M = config.M
    lo = g / M * math.fsum(beta_bounds(s.bound)[1] for s in config.sensors)
    hi = g / M * math.fsum(beta_bounds(s.bound)[0] + s.snr for s in config.sensors)
    return LambdaInterval(lo, hi)


@dataclass(frozen=True)
class ReliabilityResult:
    found: bool
    lam: float | None
    qf: float | None
    qd: float | None
    evaluations: int


def reliability_search(config, grid, qf_max, qd_min, quad=DEFAULT_QUADRATURE):
    """Is there a grid threshold with ``Q_F <= qf_max`` and ``Q_D >= qd_min``?

    Both fused probabilities are non-increasing in ``lam``, so the best
    candidate is the smallest grid point meeting the false-alarm target; it
    is located by bisection and only its detection probability is checked.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("grid must be a non-empty 1-d sequence")
    if np.any(np.diff(grid) <= 0):
        raise DomainError("grid must be strictly ascending")
    evaluations = 0
    cache = {}

    def qf_at(i):
        nonlocal evaluations
        if i not in cache:
            evaluations += 1
            cache[i] = network_qf(config, float(grid[i]), quad)
        return cache[i]

    if qf_at(grid.size - 1) > qf_max:
        return ReliabilityResult(False, None, None, None, evaluations)
    lo, hi = -1, grid.size - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if qf_at(mid) <= qf_max:
            hi = mid
        else:
            lo = mid
    lam = float(grid[hi])
    qd = network_qd(config, lam, quad)
    evaluations += 1
    return ReliabilityResult(qd >= qd_min, lam, qf_at(hi), qd, evaluations)


def grid_reliability(qf_values, qd_values, qf_max, qd_min):
    """Indices of a full sweep meeting both targets."""
    qf_values = np.asarray(qf_values)
    qd_values = np.asarray(qd_values)
    return np.flatnonzero((qf_values <= qf_max) & (qd_values >= qd_min))


def default_lambda_grid(config, points=20):
    """Ascending grid spanning the whole ROC of ``config``.

    Starts below the smallest H0 mean (``Q_F`` near 1) and ends above the
    largest H1 mean (``Q_D`` near 0), padded by six standard deviations.
    """
    if points < 1:
        raise DomainError("points must be >= 1")
    p = config.params
    g = g_p(p.p)
    h = p.half_p
    spread = 6.0 / (g * p.scale())
    a_min = min(beta_bounds(s.bound)[0] for s in config.sensors)
    top = max(beta_bounds(s.bound)[1] + s.snr for s in config.sensors)
    lo = g * a_min**h * (1.0 - spread)
    hi = g * top**h * (1.0 + spread)
    if points == 1:
        return np.array([0.5 * (lo + hi)])
    return np.linspace(max(lo, 0.0), hi, points)
