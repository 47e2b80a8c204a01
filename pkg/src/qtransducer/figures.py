"""Optical-depth sweeps for the microwave-to-optical transducer curves.

The response integrals H and C do not depend on d, so each curve costs one
evaluation of them on the output grid; the d dependence is vectorized.
"""
from dataclasses import dataclass

import numpy as np

from .distributions import make_profile
from .errors import InvalidArgument
from .grids import make_symmetric_grid
from .metrics import excitation_reference, profile_reference
from .params import derive
from .quadrature import DEFAULT_RTOL
from .transducer import (_check_uniform, _responses, _uniform_amplitude, gaussian_excitation,
                         normalize_excitation)

TWO_PI = 2 * np.pi

# shared parameters of the optical-depth sweeps (GHz values times 2 pi)
CUTOFF = -TWO_PI * 30.0
LENGTH = 0.01
GAMMA = TWO_PI * 0.01
EMISSION_TIME = 1.0
DEFAULT_C = 0.3

# (emitter width, excitation width)
CURVES = {
    "narrow_excitation": (TWO_PI * 20.0, TWO_PI * 1.0),
    "narrow_emitters": (TWO_PI * 1.0, TWO_PI * 20.0),
}
FIG3_SHAPES = ("gaussian", "sech", "lorentzian", "uniform")

D_GRIDS = {
    "fig2a": (0.1, 30.0, 50),
    "fig2b": (0.1, 10.0, 50),
    "fig3": (0.1, 30.0, 50),
}

DEFAULT_GRID_POINTS = 16001


def sweep_params(d=1.0, c=DEFAULT_C, gamma=GAMMA, length=LENGTH, cutoff=CUTOFF):
    return derive(gamma, length, c=c, d=d, cutoff=cutoff)


def sweep_grid(emitter_width, excitation_width, n_points=DEFAULT_GRID_POINTS):
    """Symmetric grid covering eight times the wider of the two spectra."""
    return make_symmetric_grid(8.0 * max(emitter_width, excitation_width), n_points)


@dataclass
class SweepResult:
    d: np.ndarray
    W: np.ndarray
    fidelity_f: np.ndarray
    fidelity_n: np.ndarray
    label: str = ""

    @property
    def peak_index(self):
        return int(np.argmax(self.W))

    @property
    def peak(self):
        i = self.peak_index
        return float(self.d[i]), float(self.W[i])


def _fidelities(E, ref, w):
    ov = np.abs(E @ (w * np.conj(ref.amplitude)))
    nE = (np.abs(E) ** 2) @ w
    nr = np.sum(w * np.abs(ref.amplitude) ** 2)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = ov / np.sqrt(nE * nr)
    return np.where(nE > 0, np.minimum(out, 1.0), np.nan)


def d_sweep(profile, excitation, params, grid, ds, include_exit_phase=False,
            rtol=DEFAULT_RTOL, label=""):
    """W, F_f and F_n for every optical depth in `ds` (uniform medium)."""
    _check_uniform(params)
    ds = np.asarray(ds, float)
    if ds.ndim != 1 or np.any(~np.isfinite(ds)) or np.any(ds < 0):
        raise InvalidArgument("optical depths must be finite and >= 0")
    f = normalize_excitation(excitation, profile, params)
    w_pts = grid.points
    wts = grid.weights
    C, H = _responses(f, profile, params, grid, rtol)
    E = _uniform_amplitude(C[None, :], H[None, :], ds[:, None], w_pts[None, :], params,
                           include_exit_phase)
    W = (np.abs(E) ** 2) @ wts
    ref_f = excitation_reference(f, grid)
    ref_n = profile_reference(profile, grid, phase_from=f)
    return SweepResult(ds, W, _fidelities(E, ref_f, wts), _fidelities(E, ref_n, wts), label)


def curve(name, shape="gaussian", ds=None, n_points=DEFAULT_GRID_POINTS, c=DEFAULT_C):
    """One optical-depth curve for a named parameter set."""
    if name not in CURVES:
        raise InvalidArgument(f"unknown curve {name!r}; expected one of {tuple(CURVES)}")
    width, exc_width = CURVES[name]
    if ds is None:
        ds = np.geomspace(*D_GRIDS["fig2a"])
    profile = make_profile(shape, width)
    f = gaussian_excitation(exc_width, t_c=EMISSION_TIME)
    grid = sweep_grid(width, exc_width, n_points)
    return d_sweep(profile, f, sweep_params(c=c), grid, ds, label=f"{name}/{shape}")


def figure_curves(name, n_points=DEFAULT_GRID_POINTS):
    """All curves of one figure as a list of SweepResult."""
    if name not in D_GRIDS:
        raise InvalidArgument(f"unknown figure {name!r}; expected one of {tuple(D_GRIDS)}")
    ds = np.geomspace(*D_GRIDS[name])
    if name == "fig3":
        return [curve("narrow_emitters", shape, ds, n_points) for shape in FIG3_SHAPES]
    return [curve(key, "gaussian", ds, n_points) for key in CURVES]
