"""Composite Gauss-Legendre quadrature for integrands with a near-real pole.

The detuning integrals carry a Lorentzian factor 1/(i(D - w) + g/2) whose
width g/2 can be thousands of times narrower than the emitter band. Panels
are graded geometrically towards the pole so every panel sees a smooth
integrand; accuracy is estimated by comparing two Gauss-Legendre orders.
"""
from functools import lru_cache

import numpy as np

from .errors import NumericFailure

DEFAULT_RTOL = 1e-7
LOW_ORDER = 16
HIGH_ORDER = 24


@lru_cache(maxsize=None)
def gauss_legendre(order):
    x, w = np.polynomial.legendre.leggauss(order)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


def panel_rule(breaks, order):
    """Nodes and weights of a composite Gauss-Legendre rule on sorted breakpoints."""
    breaks = np.asarray(breaks, dtype=float)
    a, b = breaks[:-1], breaks[1:]
    x, w = gauss_legendre(order)
    half = 0.5 * (b - a)
    mid = 0.5 * (a + b)
    nodes = (mid[:, None] + half[:, None] * x).ravel()
    weights = (half[:, None] * w).ravel()
    return nodes, weights


def graded_points(center, scale, lo, hi, ratio=2.0):
    """Breakpoints at center +- scale * ratio^k, clipped to (lo, hi)."""
    span = max(hi - center, center - lo)
    if span <= 0 or scale <= 0:
        return np.empty(0)
    kmax = int(np.ceil(np.log(max(span / scale, 1.0)) / np.log(ratio))) + 1
    offsets = scale * ratio ** np.arange(-2, kmax + 1)
    pts = np.concatenate([center - offsets, center + offsets, [center]])
    return pts[(pts > lo) & (pts < hi)]


def uniform_points(lo, hi, max_panel):
    if not np.isfinite(max_panel) or max_panel <= 0:
        return np.empty(0)
    n = int(np.ceil((hi - lo) / max_panel))
    if n <= 1:
        return np.empty(0)
    return np.linspace(lo, hi, n + 1)[1:-1]


def merge_breaks(lo, hi, *point_sets, min_gap=0.0):
    pts = [np.array([lo, hi], dtype=float)]
    for p in point_sets:
        p = np.asarray(p, dtype=float).ravel()
        pts.append(p[(p > lo) & (p < hi)])
    out = np.unique(np.concatenate(pts))
    if min_gap > 0 and out.size > 2:
        keep = np.concatenate([[True], np.diff(out) > min_gap])
        keep[-1] = True
        out = out[keep]
    return out


class PoleQuadrature:
    """Integrate weight(D) * kernel(D) over [lo, hi] with grading around poles.

    `weight` maps an array of detunings to (complex) values; `base_breaks`
    are the weight's own breakpoints (discontinuities and resolution panels).
    """

    def __init__(self, weight, lo, hi, base_breaks=(), rtol=DEFAULT_RTOL):
        self.weight = weight
        self.lo = float(lo)
        self.hi = float(hi)
        self.base_breaks = np.asarray(base_breaks, dtype=float)
        self.rtol = rtol

    def breaks_for(self, poles, scale):
        graded = [graded_points(p, scale, self.lo, self.hi) for p in poles]
        return merge_breaks(self.lo, self.hi, self.base_breaks, *graded,
                            min_gap=1e-3 * scale)

    def integrate(self, kernel, poles, scale, what="detuning integral"):
        """Return the integral of weight*kernel, graded around `poles` at `scale`."""
        if self.hi <= self.lo:
            return 0j
        breaks = self.breaks_for(poles, scale)
        results = []
        norms = []
        for order in (LOW_ORDER, HIGH_ORDER):
            x, w = panel_rule(breaks, order)
            vals = self.weight(x) * kernel(x)
            results.append(np.sum(w * vals))
            norms.append(np.sum(w * np.abs(vals)))
        err = abs(results[1] - results[0])
        ref = max(norms[1], 1e-300)
        if err > self.rtol * ref:
            raise NumericFailure(f"{what} did not converge", error_estimate=err / ref)
        return complex(results[1])


def lorentz_kernel(omega, gamma):
    """1 / (i (D - omega) + gamma/2) as a function of D."""
    def k(x):
        return 1.0 / (1j * (x - omega) + 0.5 * gamma)
    return k


def pole_integrals(quad, omegas, gamma):
    """Vector of int weight(D) / (i(D - w) + gamma/2) dD for each w in omegas."""
    omegas = np.atleast_1d(np.asarray(omegas, dtype=float))
    out = np.empty(omegas.shape, dtype=complex)
    for i, w in enumerate(omegas.ravel()):
        out.flat[i] = quad.integrate(lorentz_kernel(w, gamma), [w], 0.5 * gamma)
    return out
