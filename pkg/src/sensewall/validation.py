"""Self-checks run by ``sensewall validate``.

Each check reports a margin: positive means it passed with that much room.
Monte Carlo checks run on a scaled-down copy of the configuration (at most
``MC_MAX_N`` samples per sensing interval) so they stay desk-sized.
"""

from dataclasses import dataclass
import math

import numpy as np

from . import detector
from .errors import UnsupportedClosedFormError
from .fusion import network_qd, network_qf
from .montecarlo import SimSpec, block_rng, roc_points, simulate_statistic
from .wall import default_lambda_grid, feasible_lambda, wall_report

MC_MAX_N = 5000
MC_MAX_TRIALS = 20_000
MOMENT_N = 500
MOMENT_TRIALS = 20_000
MOMENT_Z = 4.0
ROC_ABS_TOL = 0.02
ROC_GRID_POINTS = 20


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: str = ""


def _moment_checks(cfg, seed):
    net = cfg.network()
    params = detector.DetectorParams(net.params.p, min(net.params.N, MOMENT_N))
    out = []
    for i, s in enumerate(net.sensors):
        power = s.nominal_noise_power
        for hyp in ("H0", "H1"):
            rng = block_rng(seed, 1_000_000 + 2 * i + (hyp == "H1"))
            snr = s.snr if hyp == "H1" else 0.0
            x = simulate_statistic(params, power, snr, hyp, rng, size=MOMENT_TRIALS)
            if hyp == "H0":
                m = detector.moments_h0(params, power)
            else:
                m = detector.moments_h1(params, power, 1.0, snr)
            n = x.size
            mean_se = x.std(ddof=1) / math.sqrt(n)
            c = x - x.mean()
            var = c.var(ddof=1)
            var_se = math.sqrt(max((c**4).mean() - var**2, 0.0) / n)
            z = max(abs(x.mean() - m.mean) / mean_se, abs(var - m.variance) / var_se)
            out.append(CheckResult(
                f"moments[{i}].{hyp}", z <= MOMENT_Z, MOMENT_Z - z,
                f"mean {x.mean():.6g} vs {m.mean:.6g}, var {var:.6g} vs {m.variance:.6g}",
            ))
    return out


def _roc_check(cfg, trials):
    net = cfg.network()
    net = net.with_params(detector.DetectorParams(net.params.p, min(net.params.N, MC_MAX_N)))
    grid = default_lambda_grid(net, ROC_GRID_POINTS)
    spec = SimSpec(min(trials, MC_MAX_TRIALS), cfg.sim.seed, cfg.sim.resample_beta_per_trial)
    mc = roc_points(net, grid, spec)
    worst = math.inf
    where = None
    for lam, (ef, ed) in zip(grid, mc):
        for est, ana in ((ef, network_qf(net, lam)), (ed, network_qd(net, lam))):
            tol = max(ROC_ABS_TOL, 3.0 * est.std_error)
            m = tol - abs(est.value - ana)
            if m < worst:
                worst, where = m, lam
    return CheckResult("roc_agreement", worst >= 0.0, worst, f"N={net.params.N}, trials={spec.trials}, tightest at lambda={where:.6g}")


def _wall_check(net):
    try:
        interval = feasible_lambda(net)
    except UnsupportedClosedFormError:
        return CheckResult("wall_consistency", True, math.inf, "skipped: no closed form for soft p != 2")
    report = wall_report(net)
    walled = report.satisfied_by([s.snr for s in net.sensors])
    return CheckResult(
        "wall_consistency", interval.feasible == walled, interval.hi - interval.lo,
        f"interval [{interval.lo:.6g}, {interval.hi:.6g}], walls met: {walled}",
    )


def _analytic_checks(net):
    grid = default_lambda_grid(net, ROC_GRID_POINTS)
    qf = np.array([network_qf(net, lam) for lam in grid])
    qd = np.array([network_qd(net, lam) for lam in grid])
    out = []
    rise = max(np.diff(qf).max(), np.diff(qd).max(), 0.0)
    out.append(CheckResult("monotone_in_lambda", rise <= 1e-9, 1e-9 - rise))
    if all(s.snr == 0.0 for s in net.sensors):
        gap = float(np.abs(qd - qf).max())
        out.append(CheckResult("pf_equals_pd_without_signal", gap <= 1e-12, 1e-12 - gap))
    return out


def run_validation(cfg, trials=None):
    trials = cfg.sim.trials if trials is None else trials
    net = cfg.network()
    results = []
    results.extend(_moment_checks(cfg, cfg.sim.seed))
    results.append(_wall_check(net))
    results.extend(_analytic_checks(net))
    results.append(_roc_check(cfg, trials))
    return results
