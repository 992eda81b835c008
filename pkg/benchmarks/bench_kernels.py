"""Compiled vs pure-numpy/Python timings for the hot paths.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--trials 2000]

First call of each compiled kernel is timed separately (JIT compile or
cache load). Results are checked for agreement before timing is reported.
"""

import argparse
import json
import os
import subprocess
import sys
import time

import numpy as np

from sensewall import DetectorParams, FusionRule, NetworkConfig, SensorProfile, UncertaintyBound
from sensewall import montecarlo
from sensewall._jit import USE_NUMBA


def best_of(fn, repeat):
    out, best = None, float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return out, best


def timed_once(fn):
    t = time.perf_counter()
    out = fn()
    return out, time.perf_counter() - t


def bench_mc(trials, repeat):
    net = NetworkConfig(
        [SensorProfile(UncertaintyBound(L), g) for L, g in ((1.0, 10**-0.5), (0.7, 0.1), (0.5, 10**-1.5))],
        DetectorParams(2.0, 5000), FusionRule.k_of_m(2))
    spec = montecarlo.SimSpec(trials=trials, seed=1)
    run = lambda jit: montecarlo.simulate_network(net, spec, use_numba=jit, threads=1)
    _, first = timed_once(lambda: run(True))
    fast, t_fast = best_of(lambda: run(True), repeat)
    slow, t_slow = best_of(lambda: run(False), repeat)
    assert all(np.allclose(a, b, rtol=1e-12) for a, b in zip(fast, slow))
    slots = trials * net.M * net.params.N
    return "mc network (M=3, N=5000)", first, t_fast, t_slow, f"{t_fast / slots * 1e9:.1f} ns/sample"


QUAD_SNIPPET = """
import json, sys, time
import numpy as np
from sensewall import DetectorParams, UncertaintyBound, pd_avg, pf_avg
params, bound = DetectorParams(2.0, 10**6), UncertaintyBound(0.5)
lams = np.linspace(1.0, 1.4, int(sys.argv[1]))
def sweep():
    return [pf_avg(x, bound, params) + pd_avg(x, bound, 0.3676, params) for x in lams]
t = time.perf_counter(); sweep(); first = time.perf_counter() - t
best = float("inf")
for _ in range(int(sys.argv[2])):
    t = time.perf_counter(); vals = sweep(); best = min(best, time.perf_counter() - t)
print(json.dumps({"first": first, "best": best, "vals": vals}))
"""


def _quad_run(points, repeat, disable_jit):
    env = dict(os.environ, SENSEWALL_DISABLE_JIT="1" if disable_jit else "0")
    out = subprocess.run([sys.executable, "-c", QUAD_SNIPPET, str(points), str(repeat)],
                         env=env, check=True, capture_output=True, text=True)
    return json.loads(out.stdout)


def bench_quadrature(repeat, points=100):
    # the switch is read at import, so each mode gets its own interpreter
    fast = _quad_run(points, repeat, False)
    slow = _quad_run(points, max(1, repeat // 2), True)
    assert np.allclose(fast["vals"], slow["vals"], atol=1e-12)
    note = f"{fast['best'] / points * 1e6:.0f} us/point"
    return f"pf+pd sweep ({points} lambda, N=1e6)", fast["first"], fast["best"], slow["best"], note


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--trials", type=int, default=2000)
    args = ap.parse_args()
    if not USE_NUMBA:
        raise SystemExit("numba disabled or missing; nothing to compare (unset SENSEWALL_DISABLE_JIT)")
    print(f"{'kernel':36s} {'first':>9s} {'numba':>9s} {'numpy':>9s} {'speedup':>8s}")
    for name, first, fast, slow, note in (bench_mc(args.trials, args.repeat), bench_quadrature(args.repeat)):
        print(f"{name:36s} {first:8.3f}s {fast:8.3f}s {slow:8.3f}s {slow / fast:7.1f}x  {note}")


if __name__ == "__main__":
    main()
