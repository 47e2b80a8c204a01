"""Medium response integrals over the detuning distribution.

    K(z, w)  = int dD G(z, D) x(D) / (i(D - w) + gamma/2)
    h(z, w)  = (2 pi n0)^-1 int_z^L dz' K(z', w)          (x = 1)
    H(w)     = h(0, w) for unit spectral mass;  C(w) same with x = f
"""
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .distributions import EmitterDistribution, SpectralProfile
from .errors import InvalidArgument
from .grids import SpectralField
from .quadrature import DEFAULT_RTOL, PoleQuadrature, merge_breaks, pole_integrals, uniform_points

TWO_PI = 2 * np.pi


def _check_gamma(gamma):
    if not (np.isfinite(gamma) and gamma > 0):
        raise InvalidArgument("gamma must be positive")


def linear_pole_integrals(x, y, omegas, gamma, chunk=1 << 21):
    """Exact int y(D) / (i(D - w) + gamma/2) dD for piecewise-linear y on nodes x."""
    x = np.asarray(x, float)
    y = np.asarray(y)
    omegas = np.atleast_1d(np.asarray(omegas, float))
    a, b = x[:-1], x[1:]
    ya = y[:-1]
    s = (y[1:] - ya) / (b - a)
    out = np.empty(omegas.size, dtype=complex)
    step = max(1, chunk // max(a.size, 1))
    for i0 in range(0, omegas.size, step):
        p = (omegas[i0:i0 + step] + 0.5j * gamma)[:, None]
        # i(D - w) + gamma/2 = i (D - p); integral of y/(D - p) on each segment
        logs = np.log1p((b - a) / (a - p))
        yp = ya + s * (p - a)
        out[i0:i0 + step] = -1j * np.sum(yp * logs + s * (b - a), axis=1)
    return out


def _weight_support(profile, excitation):
    lo, hi = profile.support()
    breaks = [profile.breakpoints()]
    if excitation is not None:
        flo, fhi = excitation.support()
        lo, hi = max(lo, flo), min(hi, fhi)
        breaks.append(excitation.breakpoints())
    return lo, hi, breaks


def spectral_pole_integrals(profile, gamma, omegas, excitation=None, rtol=DEFAULT_RTOL):
    """int n(D) f(D) / (i(D - w) + gamma/2) dD on an array of w (f = 1 if None)."""
    _check_gamma(gamma)
    omegas = np.atleast_1d(np.asarray(omegas, float))
    lo, hi, breaks = _weight_support(profile, excitation)
    if hi <= lo:
        return np.zeros(omegas.shape, dtype=complex)
    if profile.shape == "uniform" and excitation is None:
        # constant density: the pole integral is a single logarithm
        return linear_pole_integrals([lo, hi], np.full(2, profile.peak), omegas, gamma)
    if profile.is_tabulated:
        nodes = merge_breaks(lo, hi, *breaks)
        if excitation is not None:
            nodes = merge_breaks(lo, hi, nodes, uniform_points(lo, hi, excitation.resolution / 8))
        vals = profile(nodes)
        if excitation is not None:
            vals = vals * excitation(nodes)
        return linear_pole_integrals(nodes, vals, omegas, gamma)
    if excitation is None:
        weight = profile
    else:
        def weight(x):
            return profile(x) * excitation(x)
    quad = PoleQuadrature(weight, lo, hi, merge_breaks(lo, hi, *breaks)[1:-1], rtol=rtol)
    return pole_integrals(quad, omegas, gamma)


def response_H(profile, gamma, omega, rtol=DEFAULT_RTOL):
    """H(w) = (2 pi n0)^-1 int n(D) / (i(D - w) + gamma/2) dD."""
    if isinstance(profile, EmitterDistribution):
        profile = profile.spectral
    vals = spectral_pole_integrals(profile, gamma, omega, rtol=rtol) / (TWO_PI * profile.peak)
    return vals[0] if np.ndim(omega) == 0 else vals.reshape(np.shape(omega))


def response_C(profile, excitation, gamma, omega, rtol=DEFAULT_RTOL):
    """C(w) = (2 pi n0)^-1 int n(D) f(D) / (i(D - w) + gamma/2) dD."""
    if isinstance(profile, EmitterDistribution):
        profile = profile.spectral
    vals = spectral_pole_integrals(profile, gamma, omega, excitation, rtol=rtol)
    vals = vals / (TWO_PI * profile.peak)
    return vals[0] if np.ndim(omega) == 0 else vals.reshape(np.shape(omega))


class MediumResponse:
    """K(z, w) and its tail integral int_z^L K dz' on a fixed set of frequencies.

    Separable G gives K = density(z) * K_spec(w). Tabulated G is bilinear, so
    K is linear in z between table rows and the tail integral is exact.
    """

    def __init__(self, dist, gamma, omegas, excitation=None, rtol=DEFAULT_RTOL):
        _check_gamma(gamma)
        self.dist = dist
        self.gamma = gamma
        self.omegas = np.atleast_1d(np.asarray(omegas, float))
        self.length = dist.length
        if dist.is_separable:
            self.spectral = spectral_pole_integrals(dist.spectral, gamma, self.omegas,
                                                    excitation, rtol)
            self.rows = None
        else:
            d = dist.table_delta
            nodes = d
            if excitation is not None:
                flo, fhi = excitation.support()
                lo, hi = max(d[0], flo), min(d[-1], fhi)
                nodes = merge_breaks(lo, hi, d, uniform_points(lo, hi, excitation.resolution / 8))
            fvals = excitation(nodes) if excitation is not None else 1.0
            rows = []
            for r in dist.table:
                vals = np.interp(nodes, d, r) * fvals
                rows.append(linear_pole_integrals(nodes, vals, self.omegas, gamma))
            self.rows = np.array(rows)  # (n_table_z, n_omega)
            zt = dist.table_z
            seg = 0.5 * (self.rows[1:] + self.rows[:-1]) * np.diff(zt)[:, None]
            self._cum = np.concatenate([np.zeros((1, self.omegas.size)), np.cumsum(seg, axis=0)])

    def density(self, z):
        """K(z, w): array (len(z), len(omegas))."""
        z = np.atleast_1d(np.asarray(z, float))
        if self.rows is None:
            return self.dist.spatial(z)[:, None] * self.spectral[None, :]
        zt = self.dist.table_z
        inside = (z >= zt[0]) & (z <= zt[-1])
        zz = np.clip(z, zt[0], zt[-1])
        k = np.clip(np.searchsorted(zt, zz, side="right") - 1, 0, zt.size - 2)
        th = ((zz - zt[k]) / (zt[k + 1] - zt[k]))[:, None]
        out = (1 - th) * self.rows[k] + th * self.rows[k + 1]
        return np.where(inside[:, None], out, 0.0)

    def tail(self, z):
        """int_z^L K(z', w) dz': array (len(z), len(omegas))."""
        z = np.atleast_1d(np.asarray(z, float))
        if self.rows is None:
            return self.dist.spatial.tail_mass(z)[:, None] * self.spectral[None, :]
        zt = self.dist.table_z
        zz = np.clip(z, zt[0], zt[-1])
        k = np.clip(np.searchsorted(zt, zz, side="right") - 1, 0, zt.size - 2)
        dz = (zz - zt[k])[:, None]
        slope = (self.rows[k + 1] - self.rows[k]) / (zt[k + 1] - zt[k])[:, None]
        head = self._cum[k] + self.rows[k] * dz + 0.5 * slope * dz ** 2
        return self._cum[-1][None, :] - head

    def h(self, z):
        return self.tail(z) / (TWO_PI * self.dist.n0)


def response_h(z, omega, dist, gamma, rtol=DEFAULT_RTOL):
    """h(z, w) = (2 pi n0)^-1 int_z^L dz' int dD G(z', D) / (i(D - w) + gamma/2)."""
    z = np.asarray(z, float)
    if np.any(z < 0) or np.any(z > dist.length * (1 + 1e-12)):
        raise InvalidArgument("z must lie in [0, L]")
    resp = MediumResponse(dist, gamma, np.atleast_1d(omega), rtol=rtol)
    out = resp.h(np.atleast_1d(z))
    if np.ndim(z) == 0 and np.ndim(omega) == 0:
        return complex(out[0, 0])
    return out.reshape(np.shape(z) + np.shape(omega))


@lru_cache(maxsize=64)
def _cached_on_grid(profile, gamma, grid, excitation, rtol):
    vals = spectral_pole_integrals(profile, gamma, grid.points, excitation, rtol)
    vals = vals / (TWO_PI * profile.peak)
    vals.setflags(write=False)
    return vals


@dataclass(frozen=True, eq=False)
class ResponseCache:
    """H and C on a grid for one (profile, gamma[, excitation]) combination."""
    profile: SpectralProfile
    gamma: float
    grid: object
    excitation: object = None
    rtol: float = DEFAULT_RTOL
    _store: dict = field(default_factory=dict, repr=False)

    @property
    def H(self):
        return _cached_on_grid(self.profile, float(self.gamma), self.grid, None, self.rtol)

    @property
    def C(self):
        if self.excitation is None:
            raise InvalidArgument("no excitation attached to this cache")
        return _cached_on_grid(self.profile, float(self.gamma), self.grid, self.excitation,
                               self.rtol)


def transmitted_field(E_in, dist, params, rtol=DEFAULT_RTOL):
    """Field leaving z = 0 during storage: E_in exp(i w L/c) exp(-d h(0, w))."""
    w = E_in.grid.points
    resp = MediumResponse(dist, params.gamma, w, rtol=rtol)
    h0 = resp.h(np.array([0.0]))[0]
    amp = E_in.amplitude * np.exp(1j * w * params.length / params.c - params.d * h0)
    return SpectralField(E_in.grid, amp)


def transmitted_intensity(E_in, dist, d, gamma, rtol=DEFAULT_RTOL):
    """Transmitted spectrum |E_in|^2 exp(-2 d Re h(0, w)); the field's values hold intensity."""
    if not d >= 0:
        raise InvalidArgument("d must be >= 0")
    inten = np.abs(E_in.amplitude) ** 2
    if d == 0:
        return SpectralField(E_in.grid, inten)
    resp = MediumResponse(dist, gamma, E_in.grid.points, rtol=rtol)
    h0 = resp.h(np.array([0.0]))[0]
    att = np.exp(-2 * d * np.clip(h0.real, 0.0, None))
    return SpectralField(E_in.grid, inten * att)
