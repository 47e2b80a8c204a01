"""Storage of an incident photon into a spin wave by a backward pi pulse.

With the time origin chosen so that the storage pulse leaves the medium at
z = 0 at t = 0, the spin wave written at position z is

    S(z, D) = mu0 (2 pi)^-1/2 exp(i dk z) int dw exp(-i w tau(z)) exp(-d h(z, w))
              E_in(w) / (i(D - w) + gamma/2),
    tau(z)  = t0 + dt + (L - z) (1/c' - 1/c).
"""
from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, NumericFailure
from .grids import SpaceGrid, SpectralField
from .quadrature import DEFAULT_RTOL
from .response import MediumResponse, transmitted_intensity

TWO_PI = 2 * np.pi


@dataclass(frozen=True, eq=False)
class SpinWave:
    z: np.ndarray
    delta: np.ndarray
    values: np.ndarray
    t0: float
    delta_t: float
    params: object
    dist: object

    def stored_norm(self):
        """(L/c) int dz int dD G(z, D) |S|^2 by trapezoid on the stored grid."""
        G = self.dist.evaluate(self.z[:, None], self.delta[None, :])
        inner = np.trapezoid(G * np.abs(self.values) ** 2, self.delta, axis=1)
        return float(self.params.length / self.params.c * np.trapezoid(inner, self.z))

    def norm_profile(self):
        """Stored norm density along z."""
        G = self.dist.evaluate(self.z[:, None], self.delta[None, :])
        return self.params.length / self.params.c * np.trapezoid(
            G * np.abs(self.values) ** 2, self.delta, axis=1)

    def dump(self, path, precision=12):
        zz, dd = np.meshgrid(self.z, self.delta, indexing="ij")
        data = np.column_stack([zz.ravel(), dd.ravel(), self.values.real.ravel(),
                                self.values.imag.ravel()])
        np.savetxt(path, data, fmt=f"%.{precision}g", delimiter=",",
                   header="z,delta,re,im", comments="")


def default_delay(params):
    """Smallest control delay that keeps storage after the photon: max(0, L(1/c - 1/c'))."""
    return max(0.0, -params.length * params.inverse_ceff)


def storage_times(params, t0=None, delta_t=None):
    """(t0, delta_t) with defaults chosen so that the storage front leaves z = 0 at t = 0."""
    if delta_t is None:
        delta_t = default_delay(params)
    bound = default_delay(params)
    if delta_t < bound * (1 - 1e-12):
        raise InvalidArgument(
            f"delta_t = {delta_t:.6g} ns is below the ordering bound {bound:.6g} ns")
    if t0 is None:
        t0 = -delta_t - params.transit_delay
    return float(t0), float(delta_t)


def _z_nodes(z, length):
    if z is None:
        z = 64
    if isinstance(z, SpaceGrid):
        return z.points
    if np.ndim(z) == 0:
        return SpaceGrid(length, int(z)).points
    z = np.asarray(z, float)
    if np.any(z < 0) or np.any(z > length * (1 + 1e-12)):
        raise InvalidArgument("z must lie in [0, L]")
    return z


def _delta_nodes(delta, dist, grid):
    if delta is None:
        delta = 257
    if np.ndim(delta) == 0:
        lo, hi = dist.spectral.support()
        lo, hi = max(lo, grid.omega_min), min(hi, grid.omega_max)
        if hi <= lo:
            raise InvalidArgument("photon band does not overlap the emitter band")
        return np.linspace(lo, hi, int(delta))
    return np.asarray(delta, float)


def store_spin_wave(E_in, params, dist, t0=None, delta_t=None, z=None, delta=None,
                    rtol=DEFAULT_RTOL):
    """Spin wave left by a perfect instantaneous storage pulse."""
    t0, delta_t = storage_times(params, t0, delta_t)
    zs = _z_nodes(z, params.length)
    ds = _delta_nodes(delta, dist, E_in.grid)
    w = E_in.grid.points
    amp = E_in.grid.weights * E_in.amplitude
    if not np.any(amp) or params.d == 0:
        return SpinWave(zs, ds, np.zeros((zs.size, ds.size), complex), t0, delta_t, params, dist)
    mu0 = params.mu0(dist.n0)
    h = MediumResponse(dist, params.gamma, w, rtol=rtol).h(zs)
    tau = t0 + delta_t + (params.length - zs) * params.inverse_ceff
    V = amp[None, :] * np.exp(-1j * np.outer(tau, w) - params.d * h)
    M = 1.0 / (1j * (ds[:, None] - w[None, :]) + 0.5 * params.gamma)
    S = (V @ M.T) * (mu0 / np.sqrt(TWO_PI)) * np.exp(1j * params.delta_k * zs)[:, None]
    if not np.all(np.isfinite(S)):
        raise NumericFailure("spin-wave quadrature produced non-finite values")
    return SpinWave(zs, ds, S, t0, delta_t, params, dist)


class StorageResponse:
    """Response F(z, t; D) at fixed z, evaluated for any t and D.

    F = (i mu0 / 2 pi) int dw exp(-i w t) exp(i w (L - z)/c) exp(-d h(z, w)) / (i(D - w) + gamma/2).
    The free-propagation part (d = 0) and the 1/w^2 tail of the remainder are
    transformed analytically; the rest is a trapezoid sum on a uniform grid.
    """

    def __init__(self, z, params, dist, omega_max=None, spacing=None, rtol=DEFAULT_RTOL):
        if not 0 <= z <= params.length * (1 + 1e-12):
            raise InvalidArgument("z must lie in [0, L]")
        self.z = float(z)
        self.params = params
        self.dist = dist
        self.mu0 = params.mu0(dist.n0)
        self.delay = (params.length - z) / params.c
        prof = dist.spectral
        lo, hi = prof.support()
        if prof.shape in ("uniform", "tabulated"):
            scale = 0.5 * (hi - lo)
            core = max(abs(lo), abs(hi))
        else:
            # beyond ~10 widths the remainder after the 1/w^2 tail decays as 1/w^3
            scale = prof.width
            core = abs(prof.center) + 10 * prof.width
        if omega_max is None:
            omega_max = core + 40 * max(scale, params.gamma)
        if spacing is None:
            spacing = params.gamma / 4
        n = int(np.ceil(2 * omega_max / spacing)) + 1
        if n > 2_000_001:
            raise NumericFailure(f"storage response needs {n} frequency points")
        self.omega = np.linspace(-omega_max, omega_max, n)
        self.spacing = self.omega[1] - self.omega[0]
        self.tail = float(dist.spatial.tail_mass(self.z))
        self.beta = max(scale, params.gamma)
        if params.d > 0:
            h = MediumResponse(dist, params.gamma, self.omega, rtol=rtol).h(np.array([self.z]))[0]
            self.exp_dh = np.exp(-params.d * h) - 1.0
        else:
            self.exp_dh = np.zeros(n, complex)
        self.tail_coef = params.d * self.tail / (TWO_PI * dist.n0)

    @property
    def period(self):
        """Aliasing period of the trapezoid sum in time."""
        return TWO_PI / self.spacing

    def __call__(self, t, delta):
        t = np.atleast_1d(np.asarray(t, float))
        g = self.params.gamma
        s = t - self.delay
        a = 1j * delta + 0.5 * g
        free = np.where(s >= 0, np.exp(-a * np.clip(s, 0, None)), 0.0)
        w = self.omega
        pole = 1.0 / (1j * (delta - w) + 0.5 * g)
        asym = self.tail_coef / (w + 1j * self.beta) ** 2
        rem = self.exp_dh * pole - asym
        out = np.empty(t.size, complex)
        step = max(1, (1 << 22) // w.size)
        for i0 in range(0, t.size, step):
            ph = np.exp(-1j * np.outer(s[i0:i0 + step], w))
            out[i0:i0 + step] = ph @ rem * self.spacing / TWO_PI
        tail = np.where(s >= 0, -self.tail_coef * s * np.exp(-self.beta * np.clip(s, 0, None)),
                        0.0)
        res = 1j * self.mu0 * (free + out + tail)
        if np.any(np.abs(s) > 0.5 * self.period):
            raise NumericFailure("requested times exceed the aliasing window of the response grid")
        return res


def storage_response(z, t, delta, params, dist, **kwargs):
    """F(z, t; D) for scalar z and D and an array of times t."""
    return StorageResponse(z, params, dist, **kwargs)(t, delta)


def storage_leakage(E_in, params, dist, rtol=DEFAULT_RTOL):
    """Fraction of the incident photon transmitted through the medium during storage."""
    n_in = float(np.sum(E_in.grid.weights * np.abs(E_in.amplitude) ** 2))
    if not n_in > 0:
        raise InvalidArgument("input field has zero norm")
    inten = transmitted_intensity(E_in, dist, params.d, params.gamma, rtol).amplitude.real
    return float(np.sum(E_in.grid.weights * inten) / n_in)
