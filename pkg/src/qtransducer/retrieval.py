"""Retrieval kernels S(w, w') mapping the input photon spectrum to the echo.

    E_out(w) = (2 pi)^-1 int dw' S(w, w') E_in(w')

The time origin is fixed by the storage pulse reaching z = 0 at t = 0.
"""
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .distributions import EmitterDistribution, SpectralProfile
from .errors import InvalidArgument, ResolutionWarning
from .grids import SpectralField
from .quadrature import (DEFAULT_RTOL, PoleQuadrature, graded_points, merge_breaks,
                         panel_rule)
from .response import MediumResponse
from .transducer import _phi1, _z_panels

TWO_PI = 2 * np.pi
MAP_KINDS = ("negate", "identity", "uncorrelated")


@dataclass(frozen=True, eq=False)
class BroadeningMap:
    """Relation between storage detuning D and retrieval detuning p[D].

    negate: p = -D (CRIB); identity: p = D; uncorrelated: retrieval detunings
    follow G_R independently of the storage detuning, which is distributed
    as `g0`.
    """
    kind: str
    g0: SpectralProfile = None

    def __post_init__(self):
        if self.kind not in MAP_KINDS:
            raise InvalidArgument(f"unknown map kind {self.kind!r}")
        if self.kind == "uncorrelated" and self.g0 is None:
            raise InvalidArgument("uncorrelated map needs a detuning profile g0")

    def __call__(self, delta):
        if self.kind == "negate":
            return -np.asarray(delta)
        if self.kind == "identity":
            return np.asarray(delta)
        raise InvalidArgument("uncorrelated map has no pointwise image")


@dataclass(eq=False)
class KernelMatrix:
    out_grid: object
    in_grid: object
    provenance: str
    gamma: float
    evaluator: object = None
    _entries: np.ndarray = field(default=None, repr=False)

    @property
    def entries(self):
        if self._entries is None:
            w, wp = np.meshgrid(self.out_grid.points, self.in_grid.points, indexing="ij")
            self._entries = self.evaluator(w, wp)
        return self._entries

    @property
    def shape(self):
        return (self.out_grid.n_points, self.in_grid.n_points)

    def export(self, path, precision=12):
        """Write rows (w, w', Re S, Im S)."""
        w, wp = np.meshgrid(self.out_grid.points, self.in_grid.points, indexing="ij")
        e = self.entries
        data = np.column_stack([w.ravel(), wp.ravel(), e.real.ravel(), e.imag.ravel()])
        np.savetxt(path, data, fmt=f"%.{precision}g", delimiter=",",
                   header="omega,omega_in,re,im", comments="")


def _prefactor(storage, retrieval, n0_s, n0_r):
    return (np.sqrt(storage.d * retrieval.d) / (TWO_PI * np.sqrt(n0_s * n0_r))
            * np.sqrt(storage.c / retrieval.c))


def _ridge_width(storage, retrieval):
    return 0.5 * (storage.gamma + retrieval.gamma)


def _check_grids(out_grid, in_grid):
    for g in (out_grid, in_grid):
        if g is None:
            raise InvalidArgument("kernel needs both output and input grids")


def build_kernel_general(storage, retrieval, G_S, G_R, bmap, T_S, out_grid, in_grid,
                         rtol=DEFAULT_RTOL, min_z_panels=8):
    """Kernel from nested z and detuning quadratures for arbitrary G_S, G_R."""
    _check_grids(out_grid, in_grid)
    if not T_S >= 0:
        raise InvalidArgument("T_S must be >= 0")
    if isinstance(bmap, str):
        bmap = BroadeningMap(bmap)
    for G in (G_S, G_R):
        if not isinstance(G, EmitterDistribution):
            raise InvalidArgument("G_S and G_R must be EmitterDistribution instances")
    L = storage.length
    if abs(retrieval.length - L) > 1e-12 * L or abs(G_S.length - L) > 1e-12 * L \
            or abs(G_R.length - L) > 1e-12 * L:
        raise InvalidArgument("storage and retrieval media must have the same length")
    w = out_grid.points
    wp = in_grid.points
    gamma = _ridge_width(storage, retrieval)
    pref = _prefactor(storage, retrieval, G_S.n0, G_R.n0)
    phase_out = np.exp(1j * w * (T_S + L * retrieval.inv_c_prime))
    phase_in = np.exp(1j * wp * L * storage.inv_c_prime)
    if pref == 0:
        return KernelMatrix(out_grid, in_grid, "general", gamma,
                            _entries=np.zeros((w.size, wp.size), complex))

    hr = MediumResponse(G_R, retrieval.gamma, w, rtol=rtol)
    hs = MediumResponse(G_S, storage.gamma, wp, rtol=rtol)
    dk = storage.delta_k + retrieval.delta_k
    rate = (np.max(np.abs(w)) * L * abs(retrieval.inverse_ceff)
            + np.max(np.abs(wp)) * L * abs(storage.inverse_ceff)
            + retrieval.d * np.max(np.abs(hr.h(np.array([0.0]))))
            + storage.d * np.max(np.abs(hs.h(np.array([0.0])))) + abs(dk) * L)
    z, wz = _z_panels(L, max(rate, 2.0 * min_z_panels),
                      np.concatenate([G_S.spatial.breakpoints(), G_R.spatial.breakpoints()]))
    D = wz * np.exp(1j * dk * z)
    A_R = np.exp(-1j * np.outer(L - z, w) * retrieval.inverse_ceff - retrieval.d * hr.h(z))
    A_S = np.exp(-1j * np.outer(L - z, wp) * storage.inverse_ceff - storage.d * hs.h(z))
    K_R = MediumResponse(G_R, retrieval.gamma, w, rtol=rtol).density(z)

    if bmap.kind == "negate":
        K_S = MediumResponse(G_R.reflected(), storage.gamma, wp, rtol=rtol).density(z)
        sigma = gamma - 1j * (w[:, None] + wp[None, :])
        I = ((A_R * K_R).T @ (D[:, None] * A_S) + A_R.T @ (D[:, None] * A_S * K_S)) / sigma
    elif bmap.kind == "identity":
        K_S = MediumResponse(G_R, storage.gamma, wp, rtol=rtol).density(z)
        tau = 1j * (wp[None, :] - w[:, None]) + 0.5 * (retrieval.gamma - storage.gamma)
        near = np.abs(tau) < 1e-6 * gamma
        safe = np.where(near, 1.0, tau)
        I = (A_R.T @ (D[:, None] * A_S * K_S) - (A_R * K_R).T @ (D[:, None] * A_S)) / safe
        if np.any(near):
            I[near] = _identity_diagonal(G_R, retrieval, storage, z, D, A_R, A_S, w, wp,
                                         near, rtol)
    else:
        g0 = bmap.g0
        from .response import spectral_pole_integrals
        K0 = spectral_pole_integrals(g0, storage.gamma, wp, rtol=rtol)
        I = ((A_R * K_R).T @ (D[:, None] * A_S)) * K0[None, :]
    entries = pref * phase_out[:, None] * phase_in[None, :] * I
    if not np.all(np.isfinite(entries)):
        raise InvalidArgument("kernel has non-finite entries")
    return KernelMatrix(out_grid, in_grid, "general", gamma, _entries=entries)


def _identity_diagonal(G_R, retrieval, storage, z, D, A_R, A_S, w, wp, near, rtol):
    """Entries with coincident poles: int G / (a b) dD evaluated directly."""
    ii, jj = np.nonzero(near)
    out = np.empty(ii.size, complex)
    for n, (i, j) in enumerate(zip(ii, jj)):
        J = np.empty(z.size, complex)
        gr, gs = retrieval.gamma, storage.gamma

        def kern(x, i=i, j=j):
            return 1.0 / ((1j * (x - w[i]) + gr / 2) * (1j * (x - wp[j]) + gs / 2))
        if G_R.is_separable:
            prof = G_R.spectral
            lo, hi = prof.support()
            quad = PoleQuadrature(prof, lo, hi, prof.breakpoints(), rtol=rtol)
            J[:] = G_R.spatial(z) * quad.integrate(kern, [w[i], wp[j]], 0.5 * min(gr, gs))
        else:
            d = G_R.table_delta
            for k, row in enumerate(G_R.rows_at(z)):
                quad = PoleQuadrature(lambda x, row=row: np.interp(x, d, row), d[0], d[-1],
                                      d[1:-1], rtol=rtol)
                J[k] = quad.integrate(kern, [w[i], wp[j]], 0.5 * min(gr, gs))
        out[n] = np.sum(D * A_R[:, i] * A_S[:, j] * J)
    return out


def _crib_evaluator(storage, retrieval, T_S):
    L = storage.length
    gamma = _ridge_width(storage, retrieval)
    dbar = 0.5 * (storage.d + retrieval.d)
    amp = np.sqrt(storage.d * retrieval.d * storage.c / retrieval.c)
    dk = (storage.delta_k + retrieval.delta_k) * L

    def evaluate(w, wp):
        w = np.asarray(w, float)
        wp = np.asarray(wp, float)
        F = dk + L * (w * retrieval.inverse_ceff + wp * storage.inverse_ceff)
        phase = np.exp(1j * (w * (T_S + L * retrieval.inv_c_prime)
                             + wp * L * storage.inv_c_prime + dk))
        return amp * phase * _phi1(dbar + 1j * F) / (gamma - 1j * (w + wp))
    return evaluate


def build_kernel_crib_uniform(storage, retrieval, T_S, out_grid, in_grid):
    """Closed-form CRIB kernel for spatially uniform, spectrally broad media."""
    _check_grids(out_grid, in_grid)
    if not T_S >= 0:
        raise InvalidArgument("T_S must be >= 0")
    if abs(retrieval.length - storage.length) > 1e-12 * storage.length:
        raise InvalidArgument("storage and retrieval media must have the same length")
    return KernelMatrix(out_grid, in_grid, "crib_uniform", _ridge_width(storage, retrieval),
                        _crib_evaluator(storage, retrieval, T_S))


def build_kernel_ideal(params, T_S, out_grid, in_grid):
    """Closed-form kernel for identical storage and retrieval transitions."""
    K = build_kernel_crib_uniform(params, params, T_S, out_grid, in_grid)
    K.provenance = "ideal"
    return K


def _resolution_flags(K, E_in):
    if E_in.grid.spacing > K.gamma / 4:
        warnings.warn(f"input grid spacing {E_in.grid.spacing:.3g} exceeds gamma/4 = "
                      f"{K.gamma / 4:.3g}; the kernel ridge is under-resolved",
                      ResolutionWarning, stacklevel=3)
        return ("under_resolved",)
    return ()


def apply_kernel(K, E_in, method="auto", order=8):
    """Contract the kernel with the input spectrum.

    method 'dense' uses trapezoid weights on the stored matrix; 'antidiagonal'
    (default for closed-form kernels) integrates the spline-interpolated input
    along w' with panels graded towards the ridge w' = -w.
    """
    if E_in.grid != K.in_grid:
        raise InvalidArgument("input field grid does not match the kernel input grid")
    if method == "auto":
        method = "antidiagonal" if K.evaluator is not None else "dense"
    if method == "dense":
        flags = _resolution_flags(K, E_in)
        out = K.entries @ (E_in.grid.weights * E_in.amplitude) / TWO_PI
        return SpectralField(K.out_grid, out, flags)
    if method != "antidiagonal":
        raise InvalidArgument(f"unknown method {method!r}")
    if K.evaluator is None:
        raise InvalidArgument("antidiagonal path needs a closed-form kernel")
    knots = E_in.grid.points
    spline = CubicSpline(knots, E_in.amplitude)
    lo, hi = knots[0], knots[-1]
    out = np.empty(K.out_grid.n_points, complex)
    for i, w in enumerate(K.out_grid.points):
        breaks = merge_breaks(lo, hi, knots, graded_points(-w, 0.5 * K.gamma, lo, hi))
        x, wt = panel_rule(breaks, order)
        out[i] = np.sum(wt * K.evaluator(np.full(x.shape, w), x) * spline(x))
    return SpectralField(K.out_grid, out / TWO_PI)
