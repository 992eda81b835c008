"""Special functions and adaptive quadrature.

Everything here is a pure function of its arguments. The quadrature kernel is
compiled with numba when available; the integrand is passed in as a (jitted)
function so the same loop serves the one-, two- and three-dimensional
averages used elsewhere in the package.
"""

from dataclasses import dataclass
import math

import numpy as np

from ._jit import njit
from .errors import ConvergenceError, DomainError

SQRT2 = math.sqrt(2.0)


def gamma_fn(a):
    """Complete Gamma function for ``a > 0``."""
    a = float(a)
    if not a > 0.0 or not math.isfinite(a):
        raise DomainError(f"gamma_fn needs a finite a > 0, got {a!r}")
    return math.gamma(a)


def g_p(p):
    """Mean of ``|z|^p`` for ``z ~ CN(0, 1)``: ``Gamma((p + 2) / 2)``."""
    p = _check_exponent(p)
    return gamma_fn(0.5 * p + 1.0)


def k_p(p):
    """Variance of ``|z|^p`` for ``z ~ CN(0, 1)``."""
    p = _check_exponent(p)
    g = gamma_fn(0.5 * p + 1.0)
    return gamma_fn(p + 1.0) - g * g


def _check_exponent(p):
    p = float(p)
    if not p > 0.0 or not math.isfinite(p):
        raise DomainError(f"exponent p must be finite and > 0, got {p!r}")
    return p


@njit(cache=True)
def q_tail(t):
    # Gaussian upper tail without argument checks; safe inside kernels.
    return 0.5 * math.erfc(t / SQRT2)


def q_function(t):
    """Gaussian tail probability ``Q(t) = P(X > t)``, ``X ~ N(0, 1)``.

    Evaluated through ``erfc`` so that deep tails keep full relative
    precision; ``Q(40)`` underflows to 0.
    """
    t = float(t)
    if not math.isfinite(t):
        raise DomainError(f"q_function needs a finite argument, got {t!r}")
    return 0.5 * math.erfc(t / SQRT2)


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy controls for :func:`integrate`.

    ``panels`` is the number of equal sub-intervals the range is cut into
    before adaptive bisection starts; it guards against a sharp feature
    hiding between the first five sample points.
    """

    abs_tol: float = 1e-9
    max_depth: int = 40
    panels: int = 8

    def __post_init__(self):
        if not self.abs_tol > 0.0:
            raise DomainError(f"abs_tol must be > 0, got {self.abs_tol!r}")
        if self.max_depth < 1:
            raise DomainError(f"max_depth must be >= 1, got {self.max_depth!r}")
        if self.panels < 1:
            raise DomainError(f"panels must be >= 1, got {self.panels!r}")


DEFAULT_QUADRATURE = QuadratureSpec()


MIN_DEPTH = 2


@njit
def adaptive_simpson(f, prm, a, b, tol, max_depth, panels, noise=0.0):
    """Adaptive Simpson rule for ``f(x, prm)`` over ``[a, b]``.

    Returns ``(estimate, converged)``. Each accepted interval carries the
    Richardson correction ``(S2 - S1) / 15``. Intervals still failing the
    error test at ``max_depth`` are accepted but clear ``converged``.

    ``noise`` is a known bound on the absolute error of each ``f`` value
    (an inner integral, say); an interval whose Simpson difference is within
    ``noise * width`` cannot be improved by bisecting and is accepted.

    No interval is accepted before ``MIN_DEPTH`` bisections: on coarse
    panels the five-point difference can vanish by accident while the real
    error is large.
    """
    min_depth = min(MIN_DEPTH, max_depth)
    cap = panels + max_depth + 2
    seg = np.empty((cap, 6))
    seg_tol = np.empty(cap)
    seg_depth = np.empty(cap, np.int64)

    h = (b - a) / panels
    nodes = np.empty(panels + 1)
    fnodes = np.empty(panels + 1)
    for j in range(panels + 1):
        x = b if j == panels else a + j * h
        nodes[j] = x
        fnodes[j] = f(x, prm)

    n = 0
    panel_tol = tol / panels
    for j in range(panels - 1, -1, -1):
        lo = nodes[j]
        hi = nodes[j + 1]
        mid = 0.5 * (lo + hi)
        fmid = f(mid, prm)
        seg[n, 0] = lo
        seg[n, 1] = hi
        seg[n, 2] = fnodes[j]
        seg[n, 3] = fmid
        seg[n, 4] = fnodes[j + 1]
        seg[n, 5] = (hi - lo) * (fnodes[j] + 4.0 * fmid + fnodes[j + 1]) / 6.0
        seg_tol[n] = panel_tol
        seg_depth[n] = 0
        n += 1

    total = 0.0
    converged = True
    while n > 0:
        n -= 1
        lo = seg[n, 0]
        hi = seg[n, 1]
        flo = seg[n, 2]
        fmid = seg[n, 3]
        fhi = seg[n, 4]
        whole = seg[n, 5]
        t = seg_tol[n]
        d = seg_depth[n]

        mid = 0.5 * (lo + hi)
        lm = 0.5 * (lo + mid)
        rm = 0.5 * (mid + hi)
        flm = f(lm, prm)
        frm = f(rm, prm)
        left = (mid - lo) * (flo + 4.0 * flm + fmid) / 6.0
        right = (hi - mid) * (fmid + 4.0 * frm + fhi) / 6.0
        delta = left + right - whole

        settled = abs(delta) <= 15.0 * t or abs(delta) <= noise * (hi - lo)
        if settled and d >= min_depth:
            total += left + right + delta / 15.0
        elif d >= max_depth:
            total += left + right + delta / 15.0
            converged = False
        else:
            seg[n, 0] = mid
            seg[n, 1] = hi
            seg[n, 2] = fmid
            seg[n, 3] = frm
            seg[n, 4] = fhi
            seg[n, 5] = right
            seg_tol[n] = 0.5 * t
            seg_depth[n] = d + 1
            n += 1
            seg[n, 0] = lo
            seg[n, 1] = mid
            seg[n, 2] = flo
            seg[n, 3] = flm
            seg[n, 4] = fmid
            seg[n, 5] = left
            seg_tol[n] = 0.5 * t
            seg_depth[n] = d + 1
            n += 1
    return total, converged


_adaptive_simpson_py = getattr(adaptive_simpson, "py_func", adaptive_simpson)


def integrate(f, a, b, spec=DEFAULT_QUADRATURE):
    """Integrate a Python callable ``f(x)`` over ``[a, b]``.

    Raises :class:`ConvergenceError` (carrying the partial estimate) when some
    interval is still unresolved at ``spec.max_depth``.
    """
    a = float(a)
    b = float(b)
    if not a < b:
        raise DomainError(f"integrate needs a < b, got [{a}, {b}]")

    def wrapped(x, _prm):
        return float(f(x))

    value, ok = _adaptive_simpson_py(
        wrapped, None, a, b, spec.abs_tol, spec.max_depth, spec.panels
    )
    if not ok:
        raise ConvergenceError(
            f"adaptive Simpson did not converge within depth {spec.max_depth}",
            value,
        )
    return value


@dataclass(frozen=True)
class EstimateWithError:
    """A probability estimated from Bernoulli trials."""

    value: float
    std_error: float

    @classmethod
    def from_counts(cls, hits, trials):
        v = hits / trials
        return cls(v, math.sqrt(v * (1.0 - v) / trials))
