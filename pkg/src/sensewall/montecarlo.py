"""Monte Carlo ground truth for the analytic detector and fusion formulas.

Trials are cut into fixed blocks of ``BLOCK_TRIALS``. Block ``j`` draws from
its own PCG64 stream seeded by ``SeedSequence(seed, spawn_key=(j,))``, so the
result depends only on ``(seed, trials)`` and never on how many worker
threads ran the blocks (``SENSEWALL_THREADS``). All thresholds of a lambda
grid are applied to the same simulated statistics.

Random draws per block, in stream order: for each sensor its ``beta`` values
(when resampling and ``L > 0``), then for every trial, sensor and sample six
standard normals ``(w0.re, w0.im, w1.re, w1.im, s.re, s.im)``: H0 noise, H1
noise and the primary signal. The numba and numpy paths consume the stream
identically.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
import math
import os

import numpy as np

from ._jit import USE_NUMBA, njit
from .errors import DomainError
from .numerics import EstimateWithError
from .uncertainty import sample_beta

BLOCK_TRIALS = 1000
# Upper bound on doubles per numpy chunk (about 48 MB).
_NUMPY_CHUNK_DOUBLES = 6_000_000


@dataclass(frozen=True)
class SimSpec:
    trials: int = 100_000
    seed: int = 0
    resample_beta_per_trial: bool = True

    def __post_init__(self):
        if int(self.trials) != self.trials or self.trials < 1:
            raise DomainError(f"trials must be an integer >= 1, got {self.trials!r}")
        if int(self.seed) != self.seed or not 0 <= self.seed < 2**64:
            raise DomainError(f"seed must be an unsigned 64-bit integer, got {self.seed!r}")


def worker_count():
    raw = os.environ.get("SENSEWALL_THREADS", "").strip()
    if raw:
        try:
            n = int(raw)
        except ValueError:
            raise DomainError(f"SENSEWALL_THREADS must be an integer, got {raw!r}") from None
        return max(1, n)
    return max(1, min(8, os.cpu_count() or 1))


def block_rng(seed, block):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(int(seed), spawn_key=(int(block),))))


@njit(cache=True)
def _powh(r, h):
    if h == 1.0:
        return r
    if h == 1.5:
        return r * math.sqrt(r)
    if h == 0.5:
        return math.sqrt(r)
    if h == 2.0:
        return r * r
    return r**h


@njit(cache=True, nogil=True)
def _network_kernel(rng, noise_power, snr_eff, n, h, t0, t1):
    trials, M = noise_power.shape
    for t in range(trials):
        for i in range(M):
            c = math.sqrt(snr_eff[t, i])
            acc0 = 0.0
            acc1 = 0.0
            for _ in range(n):
                a0 = rng.standard_normal()
                b0 = rng.standard_normal()
                a1 = rng.standard_normal()
                b1 = rng.standard_normal()
                sa = rng.standard_normal()
                sb = rng.standard_normal()
                acc0 += _powh(0.5 * (a0 * a0 + b0 * b0), h)
                re = a1 + c * sa
                im = b1 + c * sb
                acc1 += _powh(0.5 * (re * re + im * im), h)
            scale = noise_power[t, i] ** h
            t0[t, i] = scale * acc0 / n
            t1[t, i] = scale * acc1 / n


def _network_numpy(rng, noise_power, snr_eff, n, h, t0, t1):
    trials, M = noise_power.shape
    chunk = max(1, _NUMPY_CHUNK_DOUBLES // (M * n * 6))
    for start in range(0, trials, chunk):
        stop = min(trials, start + chunk)
        z = rng.standard_normal((stop - start, M, n, 6))
        r0 = 0.5 * (z[..., 0] ** 2 + z[..., 1] ** 2)
        c = np.sqrt(snr_eff[start:stop])[:, :, None]
        re = z[..., 2] + c * z[..., 4]
        im = z[..., 3] + c * z[..., 5]
        r1 = 0.5 * (re * re + im * im)
        scale = noise_power[start:stop] ** h
        t0[start:stop] = scale * (r0**h).mean(axis=2)
        t1[start:stop] = scale * (r1**h).mean(axis=2)


@njit(cache=True, nogil=True)
def _statistic_kernel(rng, noise_power, snr, n, h, signal, out):
    c = math.sqrt(snr)
    scale = noise_power**h
    for t in range(out.shape[0]):
        acc = 0.0
        for _ in range(n):
            a = rng.standard_normal()
            b = rng.standard_normal()
            if signal:
                a += c * rng.standard_normal()
                b += c * rng.standard_normal()
            acc += _powh(0.5 * (a * a + b * b), h)
        out[t] = scale * acc / n


def _statistic_numpy(rng, noise_power, snr, n, h, signal, out):
    width = 4 if signal else 2
    chunk = max(1, _NUMPY_CHUNK_DOUBLES // (n * width))
    for start in range(0, out.shape[0], chunk):
        stop = min(out.shape[0], start + chunk)
        z = rng.standard_normal((stop - start, n, width))
        re = z[..., 0]
        im = z[..., 1]
        if signal:
            c = math.sqrt(snr)
            re = re + c * z[..., 2]
            im = im + c * z[..., 3]
        out[start:stop] = noise_power**h * ((0.5 * (re * re + im * im)) ** h).mean(axis=1)


def simulate_statistic(params, noise_power, snr, hypothesis, rng, size=None, use_numba=None):
    """Draw the decision statistic ``(1/N) sum |y(n)|^p``.

    ``noise_power`` is the true noise variance and ``snr`` the signal power
    relative to it; ``hypothesis`` is ``"H0"`` or ``"H1"``. Returns a float,
    or an array of ``size`` independent statistics.
    """
    if hypothesis not in ("H0", "H1"):
        raise DomainError(f"hypothesis must be 'H0' or 'H1', got {hypothesis!r}")
    if not noise_power > 0.0 or snr < 0.0:
        raise DomainError("need noise_power > 0 and snr >= 0")
    use_numba = USE_NUMBA if use_numba is None else use_numba
    out = np.empty(1 if size is None else int(size))
    kernel = _statistic_kernel if use_numba else _statistic_numpy
    kernel(rng, float(noise_power), float(snr), params.N, params.half_p, hypothesis == "H1", out)
    return float(out[0]) if size is None else out


def _simulate_block(config, spec, block, count, use_numba):
    rng = block_rng(spec.seed, block)
    M = config.M
    betas = np.ones((count, M))
    if spec.resample_beta_per_trial:
        for i, s in enumerate(config.sensors):
            betas[:, i] = sample_beta(s.bound, rng, count)
    nominal = np.array([s.nominal_noise_power for s in config.sensors])
    gammas = np.array([s.snr for s in config.sensors])
    # true noise power and SNR relative to it; the signal power stays snr * nominal
    noise_power = nominal[None, :] / betas
    snr_eff = gammas[None, :] * betas
    t0 = np.empty((count, M))
    t1 = np.empty((count, M))
    kernel = _network_kernel if use_numba else _network_numpy
    kernel(rng, noise_power, snr_eff, config.params.N, config.params.half_p, t0, t1)
    return t0, t1


def simulate_network(config, spec, use_numba=None, threads=None):
    """Per-trial, per-sensor statistics ``(T0, T1)`` under H0 and H1."""
    use_numba = USE_NUMBA if use_numba is None else use_numba
    blocks = [
        (j, min(BLOCK_TRIALS, spec.trials - j * BLOCK_TRIALS))
        for j in range(math.ceil(spec.trials / BLOCK_TRIALS))
    ]
    threads = worker_count() if threads is None else max(1, int(threads))

    def run(block):
        return _simulate_block(config, spec, block[0], block[1], use_numba)

    if threads == 1 or len(blocks) == 1:
        parts = [run(b) for b in blocks]
    else:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            parts = list(pool.map(run, blocks))
    return np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts])


def _exceedances(config, stats, lambdas):
    h = config.params.half_p
    thresholds = np.array([s.nominal_noise_power**h for s in config.sensors])
    lambdas = np.asarray(lambdas, dtype=float)
    if config.rule.is_hard:
        votes = (stats[:, :, None] > lambdas[None, None, :] * thresholds[None, :, None]).sum(axis=1)
        return (votes >= config.required_count).sum(axis=0)
    fused = stats.mean(axis=1)
    tau = lambdas * thresholds.mean()
    return (fused[:, None] > tau[None, :]).sum(axis=0)


def roc_points(config, lambda_grid, spec, use_numba=None, threads=None):
    """MC ``(qf, qd)`` estimates over an ascending lambda grid (common random numbers)."""
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("lambda grid must be non-empty")
    if np.any(np.diff(grid) < 0):
        raise DomainError("lambda grid must be ascending")
    t0, t1 = simulate_network(config, spec, use_numba, threads)
    f_hits = _exceedances(config, t0, grid)
    d_hits = _exceedances(config, t1, grid)
    return [
        (EstimateWithError.from_counts(int(f), spec.trials), EstimateWithError.from_counts(int(d), spec.trials))
        for f, d in zip(f_hits, d_hits)
    ]


def estimate_network(config, lam, spec, use_numba=None, threads=None):
    """MC estimate of the fused ``(qf, qd)`` at one normalized threshold."""
    return roc_points(config, [lam], spec, use_numba, threads)[0]
