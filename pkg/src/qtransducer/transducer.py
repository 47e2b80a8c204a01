"""Optical field emitted from an excitation stored in the emitters' spectral profile.

A microwave memory leaves each emitter with amplitude f(D); a pi pulse
moves it onto the optical transition and the ensemble radiates. The output
spectrum is

    E(w) = i mu0 L / (sqrt(2 pi) c) exp(i w L/c') int dz exp(i dk z)
           exp(-i w (L - z)/c_eff) exp(-d h(z, w)) int dD G(z, D) f(D) / (i(D - w) + gamma/2)

which reduces to closed forms for spatially uniform media.
"""
from dataclasses import dataclass, replace

import numpy as np

from .distributions import EmitterDistribution, SpectralProfile, _load_columns
from .errors import InvalidArgument
from .grids import SpectralField
from .quadrature import DEFAULT_RTOL, merge_breaks, panel_rule, uniform_points
from .response import MediumResponse, ResponseCache

TWO_PI = 2 * np.pi
GAUSS_SUPPORT = 7.0  # half-width of a Gaussian excitation's support in units of its width


@dataclass(frozen=True, eq=False)
class StoredExcitation:
    """Stored amplitude f(D) = norm * shape(D).

    Gaussian shape: exp(-(D - center)^2 / width^2) exp(i D t_c). Tabulated
    shapes are linearly interpolated complex samples.
    """
    width: float = None
    t_c: float = 0.0
    center: float = 0.0
    table_x: np.ndarray = None
    table_f: np.ndarray = None
    norm: float = 1.0

    def __post_init__(self):
        if self.table_x is None:
            if self.width is None or not self.width > 0:
                raise InvalidArgument("excitation width must be positive")
        else:
            x = np.asarray(self.table_x, float)
            f = np.asarray(self.table_f, complex)
            if x.ndim != 1 or x.shape != f.shape or x.size < 2:
                raise InvalidArgument("excitation table needs matching 1-D arrays")
            if np.any(np.diff(x) <= 0):
                raise InvalidArgument("excitation detunings must be strictly increasing")
            if not np.all(np.isfinite(f)):
                raise InvalidArgument("excitation values must be finite")
            x.setflags(write=False)
            f.setflags(write=False)
            object.__setattr__(self, "table_x", x)
            object.__setattr__(self, "table_f", f)
        if not np.isfinite(self.norm):
            raise InvalidArgument("norm must be finite")

    @property
    def is_tabulated(self):
        return self.table_x is not None

    def shape(self, delta):
        x = np.asarray(delta, float)
        if self.is_tabulated:
            re = np.interp(x, self.table_x, self.table_f.real, left=0.0, right=0.0)
            im = np.interp(x, self.table_x, self.table_f.imag, left=0.0, right=0.0)
            return re + 1j * im
        return np.exp(-((x - self.center) / self.width) ** 2 + 1j * x * self.t_c)

    def __call__(self, delta):
        return self.norm * self.shape(delta)

    def support(self):
        if self.is_tabulated:
            return float(self.table_x[0]), float(self.table_x[-1])
        return (self.center - GAUSS_SUPPORT * self.width,
                self.center + GAUSS_SUPPORT * self.width)

    @property
    def resolution(self):
        """Detuning scale on which f varies."""
        if self.is_tabulated:
            return float(np.min(np.diff(self.table_x)))
        r = self.width / 2
        if self.t_c != 0:
            r = min(r, np.pi / (2 * abs(self.t_c)))
        return r

    def breakpoints(self):
        lo, hi = self.support()
        if self.is_tabulated:
            return self.table_x[1:-1].copy()
        return uniform_points(lo, hi, self.resolution)

    def scaled(self, factor):
        return replace(self, norm=self.norm * factor)

    @property
    def is_zero(self):
        if self.norm == 0:
            return True
        return self.is_tabulated and not np.any(self.table_f)


def gaussian_excitation(width, t_c=0.0, center=0.0):
    """Unnormalized Gaussian excitation with emission time t_c."""
    return StoredExcitation(width=float(width), t_c=float(t_c), center=float(center))


def tabulated_excitation(delta, values):
    return StoredExcitation(table_x=np.asarray(delta, float), table_f=np.asarray(values, complex))


def load_excitation(path):
    """Three-column text file (detuning, Re f, Im f)."""
    x, re, im = _load_columns(path, 3)
    return tabulated_excitation(x, re + 1j * im)


def overlap_integral(excitation, profile):
    """int n(D) |f(D)|^2 dD."""
    lo, hi = profile.support()
    flo, fhi = excitation.support()
    lo, hi = max(lo, flo), min(hi, fhi)
    if hi <= lo:
        return 0.0
    breaks = merge_breaks(lo, hi, profile.breakpoints(), excitation.breakpoints())
    x, w = panel_rule(breaks, 24)
    return float(np.sum(w * profile(x) * np.abs(excitation(x)) ** 2))


def normalize_excitation(f_raw, dist, params):
    """Scale f so that (L/c) int dz int dD G |f|^2 = 1 (one stored excitation)."""
    profile = dist.spectral if isinstance(dist, EmitterDistribution) else dist
    base = replace(f_raw, norm=1.0)
    ov = overlap_integral(base, profile)
    if not ov > 0:
        raise InvalidArgument("excitation has no overlap with the emitter distribution")
    return replace(base, norm=float(np.sqrt(params.c / (params.length * ov))))


def stored_norm(f, dist, params):
    profile = dist.spectral if isinstance(dist, EmitterDistribution) else dist
    return params.length / params.c * overlap_integral(f, profile)


def _phi1(x):
    """(1 - exp(-x)) / x with the removable singularity at 0."""
    x = np.asarray(x, complex)
    small = np.abs(x) < 1e-8
    safe = np.where(small, 1.0, x)
    return np.where(small, 1 - x / 2, -np.expm1(-safe) / safe)


def _exit_phase(params, omega, include_exit_phase):
    if not include_exit_phase:
        return 1.0
    return np.exp(1j * omega * params.transit_delay)


def _uniform_amplitude(C, H, d, omega, params, include_exit_phase):
    pref = 1j * np.sqrt(d * params.length / params.c)
    x = 1j * omega * params.length * params.inverse_ceff + d * H
    return pref * C * _phi1(x) * _exit_phase(params, omega, include_exit_phase)


def _check_uniform(params):
    if params.delta_k != 0:
        raise InvalidArgument("closed-form transducer output requires k_prime == k")


def _responses(f, profile, params, out_grid, rtol):
    cache = ResponseCache(profile, params.gamma, out_grid, f, rtol)
    # C and H carry the 1/(2 pi n0) factor; amplitude uses sqrt(n0) * C
    return cache.C * np.sqrt(profile.peak), cache.H


def mw_output_uniform(f, profile, params, out_grid, include_exit_phase=False, rtol=DEFAULT_RTOL):
    """Closed-form output for a spatially uniform medium (k_prime == k)."""
    if isinstance(profile, EmitterDistribution):
        if not (profile.is_separable and profile.spatial.is_uniform):
            raise InvalidArgument("mw_output_uniform needs a spatially uniform distribution")
        profile = profile.spectral
    _check_uniform(params)
    w = out_grid.points
    if f.is_zero or params.d == 0:
        return SpectralField(out_grid, np.zeros(w.size, complex))
    C, H = _responses(f, profile, params, out_grid, rtol)
    return SpectralField(out_grid, _uniform_amplitude(C, H, params.d, w, params,
                                                      include_exit_phase))


def mw_output_approx(f, profile, params, out_grid, regime, include_exit_phase=False,
                     rtol=DEFAULT_RTOL):
    """Low optical depth ('low_d') or large cutoff frequency ('large_cutoff') forms."""
    if isinstance(profile, EmitterDistribution):
        profile = profile.spectral
    _check_uniform(params)
    w = out_grid.points
    if regime not in ("low_d", "large_cutoff"):
        raise InvalidArgument(f"unknown regime {regime!r}")
    if f.is_zero or params.d == 0:
        return SpectralField(out_grid, np.zeros(w.size, complex))
    C, H = _responses(f, profile, params, out_grid, rtol)
    pref = 1j * np.sqrt(params.d * params.length / params.c)
    phase = _exit_phase(params, w, include_exit_phase)
    if regime == "low_d":
        half = 0.5 * w * params.length * params.inverse_ceff  # pi w / w_cutoff
        amp = pref * C * np.exp(-1j * half) * np.sinc(half / np.pi) * phase
    else:
        amp = pref * C * _phi1(params.d * H) * phase
    return SpectralField(out_grid, amp)


def _z_panels(length, rate, extra_breaks=()):
    n = int(np.clip(np.ceil(rate / 2.0), 4, 4000))
    breaks = merge_breaks(0.0, length, np.linspace(0.0, length, n + 1), extra_breaks)
    return panel_rule(breaks, 16)


def mw_output_general(f, dist, params, out_grid, include_exit_phase=False, rtol=DEFAULT_RTOL,
                      block=256):
    """Output by z quadrature of the full kernel; any G(z, D) and phase mismatch."""
    if isinstance(dist, SpectralProfile):
        raise InvalidArgument("mw_output_general needs an EmitterDistribution")
    w = out_grid.points
    if f.is_zero or params.d == 0:
        return SpectralField(out_grid, np.zeros(w.size, complex))
    if abs(dist.length - params.length) > 1e-12 * params.length:
        raise InvalidArgument("distribution and transition lengths differ")
    L = params.length
    n0 = dist.n0
    mu0 = params.mu0(n0)
    resp_f = MediumResponse(dist, params.gamma, w, f, rtol)
    resp_h = MediumResponse(dist, params.gamma, w, None, rtol)
    h0 = resp_h.h(np.array([0.0]))[0]
    rate = (np.max(np.abs(w)) * L * abs(params.inverse_ceff) + params.d * np.max(np.abs(h0))
            + abs(params.delta_k) * L)
    z, wz = _z_panels(L, rate, dist.spatial.breakpoints())
    out = np.empty(w.size, complex)
    grating = np.exp(1j * params.delta_k * z) * wz
    for i0 in range(0, w.size, block):
        sl = slice(i0, i0 + block)
        wb = w[sl]
        K = resp_f.density(z)[:, sl]
        h = resp_h.h(z)[:, sl]
        expo = np.exp(-1j * np.outer(L - z, wb) * params.inverse_ceff - params.d * h)
        out[sl] = np.sum(grating[:, None] * expo * K, axis=0)
    pref = 1j * mu0 * L / (np.sqrt(TWO_PI) * params.c)
    return SpectralField(out_grid, pref * out * _exit_phase(params, w, include_exit_phase))
