"""Fusion-center combining: hard k-out-of-M voting and soft equal-gain combining.

Hard rules combine per-sensor averaged probabilities as a Poisson-binomial
tail, assuming sensor decisions are conditionally independent given the
hypothesis. Soft combining averages the raw statistics,
``T = (1/M) sum T_i``, against ``tau = (lam/M) sum nominal_i^(p/2)``.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._jit import njit
from .detector import DetectorParams, SensorProfile, pd_avg, pf_avg
from .errors import ConvergenceError, DomainError, RuleMismatchError
from .numerics import (
    DEFAULT_QUADRATURE,
    EstimateWithError,
    adaptive_simpson,
    g_p,
    q_tail,
)
from .uncertainty import sample_beta

MAX_QUADRATURE_DIMS = 3
SOFT_SAMPLING_DRAWS = 100_000

_RULE_KINDS = ("or", "and", "k_of_m", "soft_egc")


@dataclass(frozen=True)
class FusionRule:
    kind: str
    k: int | None = None

    def __post_init__(self):
        if self.kind not in _RULE_KINDS:
            raise DomainError(f"unknown fusion rule {self.kind!r}; expected one of {_RULE_KINDS}")
        if self.kind == "k_of_m":
            if self.k is None or int(self.k) != self.k or self.k < 1:
                raise DomainError(f"k_of_m needs an integer k >= 1, got {self.k!r}")
            object.__setattr__(self, "k", int(self.k))
        elif self.k is not None:
            raise DomainError(f"rule {self.kind!r} takes no k")

    @classmethod
    def OR(cls):
        return cls("or")

    @classmethod
    def AND(cls):
        return cls("and")

    @classmethod
    def k_of_m(cls, k):
        return cls("k_of_m", k)

    @classmethod
    def soft(cls):
        return cls("soft_egc")

    @property
    def is_hard(self):
        return self.kind != "soft_egc"

    def required_count(self, M):
        """Votes needed at the fusion center; ``None`` for soft combining."""
        if self.kind == "or":
            return 1
        if self.kind == "and":
            return M
        if self.kind == "k_of_m":
            return self.k
        return None

    def __str__(self):
        return f"{self.k}-of-M" if self.kind == "k_of_m" else self.kind.upper()


@dataclass(frozen=True)
class NetworkConfig:
    sensors: tuple
    params: DetectorParams
    rule: FusionRule

    def __post_init__(self):
        sensors = tuple(self.sensors)
        if not sensors:
            raise DomainError("a network needs at least one sensor")
        for s in sensors:
            if not isinstance(s, SensorProfile):
                raise DomainError(f"sensors must be SensorProfile instances, got {type(s).__name__}")
        object.__setattr__(self, "sensors", sensors)
        if self.rule.kind == "k_of_m" and self.rule.k > len(sensors):
            raise DomainError(f"k={self.rule.k} exceeds the number of sensors M={len(sensors)}")

    @property
    def M(self):
        return len(self.sensors)

    @property
    def required_count(self):
        return self.rule.required_count(self.M)

    def with_snrs(self, snrs):
        if len(snrs) != self.M:
            raise DomainError(f"expected {self.M} SNR values, got {len(snrs)}")
        sensors = tuple(
            SensorProfile(s.bound, g, s.nominal_noise_power) for s, g in zip(self.sensors, snrs)
        )
        return NetworkConfig(sensors, self.params, self.rule)

    def with_params(self, params):
        return NetworkConfig(self.sensors, params, self.rule)


def poisson_binomial_tail(probs, k):
    """``P(at least k successes)`` for independent Bernoulli(``probs[i]``)."""
    probs = [float(q) for q in probs]
    M = len(probs)
    if int(k) != k or not 1 <= k <= M:
        raise DomainError(f"k must be an integer in [1, {M}], got {k!r}")
    for q in probs:
        if not 0.0 <= q <= 1.0:
            raise DomainError(f"probabilities must lie in [0, 1], got {q!r}")
    # dist[j] = P(exactly j successes so far)
    dist = [1.0] + [0.0] * M
    for n, q in enumerate(probs, start=1):
        for j in range(n, 0, -1):
            dist[j] = dist[j] * (1.0 - q) + dist[j - 1] * q
        dist[0] *= 1.0 - q
    return math.fsum(dist[int(k):])


def _require_hard(config):
    if not config.rule.is_hard:
        raise RuleMismatchError("soft_egc is not a hard-decision rule")


def _require_soft(config):
    if config.rule.is_hard:
        raise RuleMismatchError(f"rule {config.rule} is not soft combining")


def hard_qf(config, lam, quad=DEFAULT_QUADRATURE):
    _require_hard(config)
    pf = [pf_avg(lam, s.bound, config.params, quad) for s in config.sensors]
    return poisson_binomial_tail(pf, config.required_count)


def hard_qd(config, lam, quad=DEFAULT_QUADRATURE):
    _require_hard(config)
    pd = [pd_avg(lam, s.bound, s.snr, config.params, quad) for s in config.sensors]
    return poisson_binomial_tail(pd, config.required_count)


@njit
def soft_q(lam, betas, gammas, weights, g, s, h, detect):
    """Fixed-beta soft-combining probability in product form.

    With unit nominal noise powers (``weights == 1``) the argument is
    ``(M lam prod b^h - G sum_i m_i prod_{j!=i} b_j^h) * s
    / sqrt(sum_i m_i^2 prod_{j!=i} b_j^p)`` with ``m_i = (1 + b_i g_i)^h``
    under H1 and ``m_i = 1`` under H0. ``weights`` are ``nominal_i ** h``.
    """
    M = betas.shape[0]
    bh = np.empty(M)
    wsum = 0.0
    full = 1.0
    for i in range(M):
        bh[i] = betas[i] ** h
        full *= bh[i]
        wsum += weights[i]
    num = lam * wsum * full
    den2 = 0.0
    for i in range(M):
        others = 1.0
        for j in range(M):
            if j != i:
                others *= bh[j]
        m = (1.0 + betas[i] * gammas[i]) ** h if detect else 1.0
        num -= g * weights[i] * m * others
        den2 += (weights[i] * m * others) ** 2
    return q_tail(num / math.sqrt(den2) * s)


# Parameter vector for the nested soft averages:
# [lam, G, s, h, detect, M, nfree, level_tol, max_depth, panels, ok,
#  betas(M), gammas(M), weights(M), free_index(nfree), L_free(nfree)]
_HDR = 11


@njit
def _soft_eval(prm):
    M = int(prm[5])
    b0 = _HDR
    return soft_q(
        prm[0],
        prm[b0:b0 + M],
        prm[b0 + M:b0 + 2 * M],
        prm[b0 + 2 * M:b0 + 3 * M],
        prm[1],
        prm[2],
        prm[3],
        prm[4] != 0.0,
    )


@njit
def _set_beta(prm, level, u):
    M = int(prm[5])
    nfree = int(prm[6])
    idx = int(prm[_HDR + 3 * M + nfree - level])
    prm[_HDR + idx] = 10.0 ** (u / 10.0)


@njit
def _free_L(prm, level):
    M = int(prm[5])
    nfree = int(prm[6])
    return prm[_HDR + 3 * M + nfree + nfree - level]


@njit
def _soft_level1(u, prm):
    _set_beta(prm, 1, u)
    return _soft_eval(prm)


@njit
def _avg_noise(prm, level):
    # error bound on a level-`level` average as seen by the level above it;
    # without it the outer rule keeps bisecting to chase inner rounding
    e = 0.0
    for _ in range(level):
        e = prm[7] + 2.0 * e
    return 2.0 * e


@njit
def _soft_level2(u, prm):
    _set_beta(prm, 2, u)
    L = _free_L(prm, 1)
    v, ok = adaptive_simpson(_soft_level1, prm, -L, L, prm[7] * 2.0 * L, int(prm[8]), int(prm[9]))
    if not ok:
        prm[10] = 0.0
    return v / (2.0 * L)


@njit
def _soft_level3(u, prm):
    _set_beta(prm, 3, u)
    L = _free_L(prm, 2)
    v, ok = adaptive_simpson(_soft_level2, prm, -L, L, prm[7] * 2.0 * L, int(prm[8]), int(prm[9]),
                             _avg_noise(prm, 1))
    if not ok:
        prm[10] = 0.0
    return v / (2.0 * L)


@njit
def soft_average_quadrature(prm):
    nfree = int(prm[6])
    L = _free_L(prm, nfree)
    tol = prm[7] * 2.0 * L
    depth = int(prm[8])
    panels = int(prm[9])
    if nfree == 1:
        v, ok = adaptive_simpson(_soft_level1, prm, -L, L, tol, depth, panels)
    elif nfree == 2:
        v, ok = adaptive_simpson(_soft_level2, prm, -L, L, tol, depth, panels, _avg_noise(prm, 1))
    else:
        v, ok = adaptive_simpson(_soft_level3, prm, -L, L, tol, depth, panels, _avg_noise(prm, 2))
    return v / (2.0 * L), ok and prm[10] != 0.0


@njit
def _soft_many(lam, betas, gammas, weights, g, s, h, detect):
    out = np.empty(betas.shape[0])
    for t in range(betas.shape[0]):
        out[t] = soft_q(lam, betas[t], gammas, weights, g, s, h, detect)
    return out


def _soft_arrays(config):
    h = config.params.half_p
    gammas = np.array([s.snr for s in config.sensors])
    weights = np.array([s.nominal_noise_power ** h for s in config.sensors])
    return gammas, weights


def _soft_fixed(lam, betas, gammas, config, detect):
    _require_soft(config)
    betas = np.asarray(betas, dtype=float)
    if betas.ndim != 1 or betas.shape[0] == 0:
        raise DomainError("soft combining needs a non-empty list of betas")
    if betas.shape[0] != config.M or np.any(betas <= 0.0):
        raise DomainError(f"expected {config.M} positive betas, got {betas.tolist()}")
    _, weights = _soft_arrays(config)
    gammas = np.asarray(gammas, dtype=float)
    if gammas.shape != betas.shape:
        raise DomainError("betas and gammas must have the same length")
    p = config.params
    return soft_q(float(lam), betas, gammas, weights, g_p(p.p), p.scale(), p.half_p, detect)


def soft_qf_fixed(lam, betas, config):
    return _soft_fixed(lam, betas, np.zeros(len(betas)), config, False)


def soft_qd_fixed(lam, betas, gammas, config):
    return _soft_fixed(lam, betas, gammas, config, True)


def soft_average(lam, config, detect, quad=DEFAULT_QUADRATURE, rng=None,
                 draws=SOFT_SAMPLING_DRAWS, method=None):
    """Soft-combining probability averaged over the joint beta law.

    Sensors with ``L_dB = 0`` are fixed at ``beta = 1``. Up to three
    uncertain sensors are integrated by nested adaptive Simpson; beyond that
    (or with ``method="sampling"``) the average is a Monte Carlo mean over
    ``draws`` beta vectors, reported with its standard error.
    """
    _require_soft(config)
    p = config.params
    g = g_p(p.p)
    s = p.scale()
    h = p.half_p
    gammas, weights = _soft_arrays(config)
    if not detect:
        gammas = np.zeros_like(gammas)
    free = [i for i, sp in enumerate(config.sensors) if not sp.bound.degenerate]
    M = config.M

    if not free:
        v = soft_q(float(lam), np.ones(M), gammas, weights, g, s, h, detect)
        return EstimateWithError(v, 0.0)

    if method is None:
        method = "quadrature" if len(free) <= MAX_QUADRATURE_DIMS else "sampling"

    if method == "sampling":
        if rng is None:
            rng = np.random.default_rng(0)
        betas = np.ones((draws, M))
        for i in free:
            betas[:, i] = sample_beta(config.sensors[i].bound, rng, draws)
        vals = _soft_many(float(lam), betas, gammas, weights, g, s, h, detect)
        return EstimateWithError(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(draws)))

    if method != "quadrature":
        raise DomainError(f"unknown averaging method {method!r}")
    if len(free) > MAX_QUADRATURE_DIMS:
        raise DomainError(f"quadrature supports at most {MAX_QUADRATURE_DIMS} uncertain sensors")

    nfree = len(free)
    prm = np.concatenate([
        [float(lam), g, s, h, 1.0 if detect else 0.0, M, nfree,
         quad.abs_tol / (2**nfree - 1), quad.max_depth, quad.panels, 1.0],
        np.ones(M),
        gammas,
        weights,
        np.array(free, dtype=float),
        np.array([config.sensors[i].L_dB for i in free]),
    ])
    value, ok = soft_average_quadrature(prm)
    if not ok:
        raise ConvergenceError(f"soft averaging did not converge at lambda={lam}", value)
    return EstimateWithError(min(max(value, 0.0), 1.0), 0.0)


def soft_qf_avg(lam, config, quad=DEFAULT_QUADRATURE, rng=None):
    return soft_average(lam, config, False, quad, rng).value


def soft_qd_avg(lam, config, quad=DEFAULT_QUADRATURE, rng=None):
    return soft_average(lam, config, True, quad, rng).value


def network_qf(config, lam, quad=DEFAULT_QUADRATURE):
    """Fused false-alarm probability for any rule."""
    if config.rule.is_hard:
        return hard_qf(config, lam, quad)
    return soft_qf_avg(lam, config, quad)


def network_qd(config, lam, quad=DEFAULT_QUADRATURE):
    """Fused detection probability for any rule."""
    if config.rule.is_hard:
        return hard_qd(config, lam, quad)
    return soft_qd_avg(lam, config, quad)
