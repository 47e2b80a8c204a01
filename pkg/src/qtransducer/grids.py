"""Unit conventions, grids and the spectral field container.

Units: angular frequency in rad/ns, time in ns, length in m, velocity in m/ns.
Fourier convention: E(w) = (2 pi)^-1/2 int dt exp(i w t) E(t), so that
int |E(w)|^2 dw = int |E(t)|^2 dt is a photon number.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument


def _trapezoid_weights(n, h):
    w = np.full(n, h)
    w[0] = w[-1] = h / 2
    return w


@dataclass(frozen=True)
class FrequencyGrid:
    omega_min: float
    omega_max: float
    n_points: int

    def __post_init__(self):
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise InvalidArgument("n_points must be an integer >= 2")
        if not (np.isfinite(self.omega_min) and np.isfinite(self.omega_max)):
            raise InvalidArgument("grid bounds must be finite")
        if not self.omega_max > self.omega_min:
            raise InvalidArgument("omega_max must exceed omega_min")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def spacing(self):
        return (self.omega_max - self.omega_min) / (self.n_points - 1)

    @property
    def points(self):
        p = np.linspace(self.omega_min, self.omega_max, self.n_points)
        if self.omega_min == -self.omega_max:
            # exact antisymmetry, so w = 0 and every -w are grid points
            p = 0.5 * (p - p[::-1])
        return p

    @property
    def weights(self):
        return _trapezoid_weights(self.n_points, self.spacing)

    def is_symmetric(self, rtol=1e-12):
        scale = max(abs(self.omega_min), abs(self.omega_max))
        return abs(self.omega_min + self.omega_max) <= rtol * scale


@dataclass(frozen=True)
class SpaceGrid:
    length: float
    n_points: int

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidArgument("length must be positive")
        if int(self.n_points) != self.n_points or self.n_points < 2:
            raise InvalidArgument("n_points must be an integer >= 2")
        object.__setattr__(self, "n_points", int(self.n_points))

    @property
    def points(self):
        return np.linspace(0.0, self.length, self.n_points)

    @property
    def spacing(self):
        return self.length / (self.n_points - 1)

    @property
    def weights(self):
        return _trapezoid_weights(self.n_points, self.spacing)


def make_symmetric_grid(half_width, n_points):
    """Uniform grid on [-half_width, half_width] with an odd point count (0 included)."""
    if not half_width > 0:
        raise InvalidArgument("half_width must be positive")
    if int(n_points) != n_points or n_points < 3 or n_points % 2 == 0:
        raise InvalidArgument("n_points must be an odd integer >= 3")
    return FrequencyGrid(-float(half_width), float(half_width), int(n_points))


def default_grid(widths, gamma=None, resolve_gamma=False, half_width_factor=8.0,
                 points_per_width=50, max_points=200001):
    """Symmetric grid sized for the given spectral widths.

    Half-width is half_width_factor * max(widths, gamma); spacing is at most
    min(widths)/points_per_width, and at most gamma/4 when resolve_gamma is set.
    """
    widths = [float(w) for w in np.atleast_1d(widths) if w is not None]
    if not widths or min(widths) <= 0:
        raise InvalidArgument("widths must be positive")
    scale = max(widths + ([gamma] if gamma else []))
    half = half_width_factor * scale
    h = min(widths) / points_per_width
    if resolve_gamma:
        if not gamma or gamma <= 0:
            raise InvalidArgument("gamma required to resolve the kernel ridge")
        h = min(h, gamma / 4)
    n = int(np.ceil(2 * half / h)) + 1
    n += (n + 1) % 2
    if n > max_points:
        raise InvalidArgument(f"default grid needs {n} points (> {max_points})")
    return make_symmetric_grid(half, n)


@dataclass(frozen=True, eq=False)
class SpectralField:
    """Complex photon amplitude sampled on a FrequencyGrid.

    `flags` carries metadata such as "under_resolved" set by kernel application.
    """
    grid: FrequencyGrid
    amplitude: np.ndarray
    flags: tuple = field(default=())

    def __post_init__(self):
        a = np.array(self.amplitude, dtype=complex)
        if a.shape != (self.grid.n_points,):
            raise InvalidArgument(
                f"amplitude has shape {a.shape}, grid has {self.grid.n_points} points")
        if not np.all(np.isfinite(a)):
            raise InvalidArgument("amplitude must be finite")
        a.setflags(write=False)
        object.__setattr__(self, "amplitude", a)
        object.__setattr__(self, "flags", tuple(self.flags))

    @property
    def omega(self):
        return self.grid.points

    def scaled(self, factor):
        return SpectralField(self.grid, factor * self.amplitude, self.flags)

    def __add__(self, other):
        if other.grid != self.grid:
            raise InvalidArgument("fields live on different grids")
        return SpectralField(self.grid, self.amplitude + other.amplitude,
                             tuple(sorted(set(self.flags) | set(other.flags))))


def field_norm(field):
    """Trapezoid estimate of int |E(w)|^2 dw."""
    return float(np.sum(field.grid.weights * np.abs(field.amplitude) ** 2))


def zero_field(grid):
    return SpectralField(grid, np.zeros(grid.n_points, dtype=complex))


@dataclass(frozen=True)
class GaussianPulse:
    """Normalized Gaussian single-photon wavepacket.

    E(t) = A exp(-(t - t_center)^2 / (2 duration^2)) exp(-i carrier t),
    with int |E(t)|^2 dt = 1.
    """
    t_center: float
    duration: float
    carrier: float = 0.0

    def __post_init__(self):
        if not self.duration > 0:
            raise InvalidArgument("duration must be positive")

    @property
    def _amp(self):
        return (self.duration * np.sqrt(np.pi)) ** -0.5

    def time(self, t):
        t = np.asarray(t, dtype=float)
        return (self._amp * np.exp(-(t - self.t_center) ** 2 / (2 * self.duration ** 2))
                * np.exp(-1j * self.carrier * t))

    def spectrum(self, omega):
        w = np.asarray(omega, dtype=float) - self.carrier
        # carrier phase exp(-i carrier t) is absorbed into the shifted frequency
        return (self._amp * self.duration * np.exp(-(self.duration * w) ** 2 / 2)
                * np.exp(1j * w * self.t_center))

    def field(self, grid):
        return SpectralField(grid, self.spectrum(grid.points))

    @property
    def bandwidth(self):
        return 1.0 / self.duration
