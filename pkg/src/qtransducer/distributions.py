"""Emitter densities G(z, D): spectral profiles, spatial profiles and their product.

Closed-form spectral shapes share one width parameter `width` and all have
peak density 1/(sqrt(pi) width):

    gaussian    N exp(-D^2/width^2)
    sech        N sech(sqrt(pi) D / width)
    lorentzian  N / (D^2 + (width/sqrt(pi))^2)
    uniform     N on |D| <= sqrt(pi) width / 2
"""
from dataclasses import dataclass

import numpy as np
from scipy.signal import fftconvolve

from .errors import InvalidArgument, InvalidDistribution
from .quadrature import graded_points, merge_breaks, uniform_points

SHAPES = ("gaussian", "sech", "lorentzian", "uniform", "tabulated")

SQRT_PI = np.sqrt(np.pi)

# half-width of the quadrature domain in units of width
DEFAULT_TRUNCATION = {"gaussian": 10.0, "sech": 12.0, "uniform": None,
                      "lorentzian": 4000.0}

# tail mass of the Lorentzian beyond x: (2/pi) * atan(a/x) ~ 2a/(pi x)


def _load_columns(path, ncols):
    with open(path) as fh:
        text = fh.read()
    rows = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.replace(",", " ").replace(";", " ").split()
        if len(parts) < ncols:
            raise InvalidArgument(f"{path}: expected {ncols} columns, got {line!r}")
        rows.append([float(p) for p in parts[:ncols]])
    if len(rows) < 2:
        raise InvalidArgument(f"{path}: need at least two rows")
    return np.array(rows).T


@dataclass(frozen=True, eq=False)
class SpectralProfile:
    """Normalized spectral density n(D). Hashes by identity (used as a cache key)."""
    shape: str
    width: float
    center: float = 0.0
    table_x: np.ndarray = None
    table_y: np.ndarray = None
    truncation: float = None

    def __post_init__(self):
        if self.shape not in SHAPES:
            raise InvalidArgument(f"unknown shape {self.shape!r}; expected one of {SHAPES}")
        if self.shape == "tabulated":
            x = np.asarray(self.table_x, dtype=float)
            y = np.asarray(self.table_y, dtype=float)
            if x.ndim != 1 or x.shape != y.shape or x.size < 2:
                raise InvalidArgument("table needs matching 1-D arrays with >= 2 samples")
            if not np.all(np.isfinite(x)) or not np.all(np.isfinite(y)):
                raise InvalidArgument("table values must be finite")
            if np.any(np.diff(x) <= 0):
                raise InvalidArgument("table detunings must be strictly increasing")
            if np.any(y < 0):
                raise InvalidDistribution("spectral density must be non-negative")
            mass = np.trapezoid(y, x)
            if not mass > 0:
                raise InvalidDistribution("spectral table is identically zero")
            x = x + self.center
            y = y / mass
            x.setflags(write=False)
            y.setflags(write=False)
            object.__setattr__(self, "table_x", x)
            object.__setattr__(self, "table_y", y)
            object.__setattr__(self, "center", 0.0)
            object.__setattr__(self, "width", float(np.max(x) - np.min(x)) / 2)
        else:
            if not (np.isfinite(self.width) and self.width > 0):
                raise InvalidArgument("width must be positive")
            if self.truncation is not None and not self.truncation > 0:
                raise InvalidArgument("truncation must be positive")

    # -- evaluation -------------------------------------------------------
    @property
    def norm_constant(self):
        g = self.width
        if self.shape == "gaussian":
            return 1.0 / (SQRT_PI * g)
        if self.shape == "sech":
            return 1.0 / (SQRT_PI * g)
        if self.shape == "lorentzian":
            a = g / SQRT_PI
            return a / np.pi
        if self.shape == "uniform":
            return 1.0 / (SQRT_PI * g)
        return None

    def __call__(self, delta):
        x = np.asarray(delta, dtype=float) - self.center
        g = self.width
        if self.shape == "gaussian":
            return self.norm_constant * np.exp(-(x / g) ** 2)
        if self.shape == "sech":
            u = np.abs(SQRT_PI * x / g)
            return self.norm_constant * 2 * np.exp(-u) / (1 + np.exp(-2 * u))
        if self.shape == "lorentzian":
            a = g / SQRT_PI
            return self.norm_constant / (x ** 2 + a ** 2)
        if self.shape == "uniform":
            return np.where(np.abs(x) <= SQRT_PI * g / 2, self.norm_constant, 0.0)
        return np.interp(x, self.table_x, self.table_y, left=0.0, right=0.0)

    @property
    def peak(self):
        if self.shape == "tabulated":
            return float(np.max(self.table_y))
        return float(1.0 / (SQRT_PI * self.width))

    @property
    def is_tabulated(self):
        return self.shape == "tabulated"

    # -- quadrature support -----------------------------------------------
    def support(self):
        """Integration domain (lo, hi) used by all detuning quadratures."""
        if self.shape == "tabulated":
            return float(self.table_x[0]), float(self.table_x[-1])
        if self.shape == "uniform":
            h = SQRT_PI * self.width / 2
            return self.center - h, self.center + h
        t = self.truncation or DEFAULT_TRUNCATION[self.shape]
        return self.center - t * self.width, self.center + t * self.width

    def breakpoints(self):
        """Interior points that make each panel smooth and well resolved."""
        lo, hi = self.support()
        if self.shape == "tabulated":
            return self.table_x[1:-1].copy()
        if self.shape == "uniform":
            return np.empty(0)
        if self.shape == "lorentzian":
            a = self.width / SQRT_PI
            return merge_breaks(lo, hi, graded_points(self.center, a / 2, lo, hi),
                                uniform_points(self.center - 4 * a, self.center + 4 * a, a / 2))[1:-1]
        return uniform_points(lo, hi, self.width / 2)

    def mass(self):
        """Mass inside the quadrature domain (1 up to truncation of the tails)."""
        from .quadrature import panel_rule
        lo, hi = self.support()
        x, w = panel_rule(merge_breaks(lo, hi, self.breakpoints()), 24)
        return float(np.sum(w * self(x)))

    def reflected(self):
        """Profile of -D."""
        if self.shape == "tabulated":
            return SpectralProfile("tabulated", 0.0, 0.0, -self.table_x[::-1], self.table_y[::-1])
        return SpectralProfile(self.shape, self.width, -self.center, truncation=self.truncation)

    def sample_table(self, step=None, max_points=1 << 20):
        """(x, y) samples on a uniform grid covering a core of the support."""
        lo, hi = self.support()
        if self.shape == "lorentzian":
            # composition only needs the core; the renormalized table absorbs the tail
            lo = max(lo, self.center - 200 * self.width)
            hi = min(hi, self.center + 200 * self.width)
        if self.shape == "tabulated" and step is None:
            step = float(np.min(np.diff(self.table_x)))
        if step is None:
            step = self.width / 40
        n = int(np.ceil((hi - lo) / step)) + 1
        if n > max_points:
            raise InvalidArgument("profile table would exceed the point budget")
        x = lo + step * np.arange(n)
        return x, self(x)


def make_profile(shape, width=None, center=0.0, truncation=None):
    """Closed-form normalized spectral profile."""
    if shape == "tabulated":
        raise InvalidArgument("use profile_from_table for tabulated profiles")
    if shape not in SHAPES:
        raise InvalidArgument(f"unknown shape {shape!r}")
    if width is None or not width > 0:
        raise InvalidArgument("width must be positive")
    return SpectralProfile(shape, float(width), float(center), truncation=truncation)


def profile_from_table(delta, weight, center=0.0):
    """Linearly interpolated profile, renormalized to unit mass."""
    return SpectralProfile("tabulated", 0.0, float(center), np.asarray(delta, float),
                           np.asarray(weight, float))


def load_profile(path):
    """Two-column text file (detuning in rad/ns, weight)."""
    x, y = _load_columns(path, 2)
    return profile_from_table(x, y)


def compose_broadening(reversible, irreversible, max_points=1 << 20):
    """Density of D0 + D1 for independent reversible and irreversible detunings."""
    steps = []
    for p in (reversible, irreversible):
        if p.is_tabulated:
            steps.append(float(np.min(np.diff(p.table_x))))
        else:
            steps.append(p.width / 40)
    step = min(steps)
    spans = [np.diff(p.support())[0] for p in (reversible, irreversible)]
    total = sum(spans)
    if total / step > max_points:
        step = total / max_points
    x1, y1 = reversible.sample_table(step, max_points)
    x2, y2 = irreversible.sample_table(step, max_points)
    y = fftconvolve(y1, y2) * step
    x = x1[0] + x2[0] + step * np.arange(y.size)
    y = np.clip(y, 0.0, None)
    return profile_from_table(x, y)


@dataclass(frozen=True, eq=False)
class SpatialProfile:
    """Normalized density along the medium, uniform or linearly interpolated."""
    length: float
    table_z: np.ndarray = None
    table_y: np.ndarray = None

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidArgument("length must be positive")
        if self.table_z is not None:
            z = np.asarray(self.table_z, float)
            y = np.asarray(self.table_y, float)
            if z.ndim != 1 or z.shape != y.shape or z.size < 2:
                raise InvalidArgument("spatial table needs matching 1-D arrays")
            if np.any(np.diff(z) <= 0):
                raise InvalidArgument("spatial nodes must be strictly increasing")
            if z[0] < 0 or z[-1] > self.length * (1 + 1e-12):
                raise InvalidArgument("spatial nodes must lie in [0, L]")
            if np.any(y < 0):
                raise InvalidDistribution("spatial density must be non-negative")
            mass = np.trapezoid(y, z)
            if not mass > 0:
                raise InvalidDistribution("spatial table is identically zero")
            y = y / mass
            z.setflags(write=False)
            y.setflags(write=False)
            object.__setattr__(self, "table_z", z)
            object.__setattr__(self, "table_y", y)

    @property
    def is_uniform(self):
        return self.table_z is None

    def __call__(self, z):
        z = np.asarray(z, float)
        if self.is_uniform:
            return np.where((z >= 0) & (z <= self.length), 1.0 / self.length, 0.0)
        return np.interp(z, self.table_z, self.table_y, left=0.0, right=0.0)

    def tail_mass(self, z):
        """int_z^L density(z') dz'."""
        z = np.clip(np.asarray(z, float), 0.0, self.length)
        if self.is_uniform:
            return (self.length - z) / self.length
        zt, yt = self.table_z, self.table_y
        seg = 0.5 * (yt[1:] + yt[:-1]) * np.diff(zt)
        cum = np.concatenate([[0.0], np.cumsum(seg)])  # mass on [z0, z_k]
        total = cum[-1]
        zz = np.clip(z, zt[0], zt[-1])
        k = np.clip(np.searchsorted(zt, zz, side="right") - 1, 0, zt.size - 2)
        dz = zz - zt[k]
        slope = (yt[k + 1] - yt[k]) / (zt[k + 1] - zt[k])
        head = cum[k] + yt[k] * dz + 0.5 * slope * dz ** 2
        return total - head

    def breakpoints(self):
        if self.is_uniform:
            return np.empty(0)
        return self.table_z.copy()


def uniform_spatial(length):
    return SpatialProfile(float(length))


def spatial_from_table(length, z, weight):
    return SpatialProfile(float(length), np.asarray(z, float), np.asarray(weight, float))


@dataclass(frozen=True, eq=False)
class EmitterDistribution:
    """G(z, D), either separable spatial x spectral or a bilinear table."""
    length: float
    spatial: SpatialProfile = None
    spectral: SpectralProfile = None
    table_z: np.ndarray = None
    table_delta: np.ndarray = None
    table: np.ndarray = None

    def __post_init__(self):
        if not self.length > 0:
            raise InvalidArgument("length must be positive")
        if self.table is None:
            if self.spatial is None or self.spectral is None:
                raise InvalidArgument("separable distribution needs spatial and spectral parts")
            if abs(self.spatial.length - self.length) > 1e-12 * self.length:
                raise InvalidArgument("spatial profile length differs from distribution length")
            return
        z = np.asarray(self.table_z, float)
        d = np.asarray(self.table_delta, float)
        g = np.asarray(self.table, float)
        if g.shape != (z.size, d.size) or z.size < 2 or d.size < 2:
            raise InvalidArgument("table must have shape (len(z), len(delta)) with >= 2 each")
        if np.any(np.diff(z) <= 0) or np.any(np.diff(d) <= 0):
            raise InvalidArgument("table axes must be strictly increasing")
        if z[0] < 0 or z[-1] > self.length * (1 + 1e-12):
            raise InvalidArgument("table z nodes must lie in [0, L]")
        if not np.all(np.isfinite(g)) or np.any(g < 0):
            raise InvalidDistribution("G must be finite and non-negative")
        mass = np.trapezoid(np.trapezoid(g, d, axis=1), z)
        if not mass > 0:
            raise InvalidDistribution("G table is identically zero")
        g = g / mass
        for a in (z, d, g):
            a.setflags(write=False)
        object.__setattr__(self, "table_z", z)
        object.__setattr__(self, "table_delta", d)
        object.__setattr__(self, "table", g)
        object.__setattr__(self, "spectral",
                           profile_from_table(d, np.trapezoid(g, z, axis=0)))
        object.__setattr__(self, "spatial",
                           spatial_from_table(self.length, z, np.trapezoid(g, d, axis=1)))

    @property
    def is_separable(self):
        return self.table is None

    @property
    def n0(self):
        return self.spectral.peak

    def evaluate(self, z, delta):
        z = np.asarray(z, float)
        if np.any(z < 0) or np.any(z > self.length * (1 + 1e-12)):
            raise InvalidArgument("z must lie in [0, L]")
        delta = np.asarray(delta, float)
        if self.is_separable:
            return self.spatial(z) * self.spectral(delta)
        return self._bilinear(z, delta)

    def _bilinear(self, z, delta):
        z, delta = np.broadcast_arrays(z, delta)
        rows = self.rows_at(z.ravel())
        out = np.array([np.interp(dv, self.table_delta, r, left=0.0, right=0.0)
                        for dv, r in zip(delta.ravel(), rows)])
        return out.reshape(z.shape)

    def rows_at(self, z):
        """Table rows G(z, table_delta) linearly interpolated in z."""
        zt = self.table_z
        z = np.asarray(z, float)
        inside = (z >= zt[0]) & (z <= zt[-1])
        zz = np.clip(z, zt[0], zt[-1])
        k = np.clip(np.searchsorted(zt, zz, side="right") - 1, 0, zt.size - 2)
        th = (zz - zt[k]) / (zt[k + 1] - zt[k])
        rows = (1 - th)[:, None] * self.table[k] + th[:, None] * self.table[k + 1]
        return np.where(inside[:, None], rows, 0.0)

    def marginal_spectral(self):
        return self.spectral

    def marginal_spatial(self):
        return self.spatial

    def total_mass(self):
        if self.is_separable:
            return self.spectral.mass() * (1.0 - float(self.spatial.tail_mass(self.length)))
        return float(np.trapezoid(np.trapezoid(self.table, self.table_delta, axis=1),
                                  self.table_z))

    def reflected(self):
        """Distribution of (z, -D)."""
        if self.is_separable:
            return EmitterDistribution(self.length, self.spatial, self.spectral.reflected())
        return EmitterDistribution(self.length, table_z=self.table_z,
                                   table_delta=-self.table_delta[::-1],
                                   table=self.table[:, ::-1])


def separable(length, spectral, spatial=None):
    spatial = spatial if spatial is not None else uniform_spatial(length)
    return EmitterDistribution(float(length), spatial, spectral)


def tabulated_distribution(length, z, delta, table):
    return EmitterDistribution(float(length), table_z=z, table_delta=delta, table=table)


def peak_density(dist):
    if isinstance(dist, SpectralProfile):
        return dist.peak
    return dist.n0


def evaluate(dist, z, delta):
    return dist.evaluate(z, delta)


def marginal_spectral(dist):
    return dist.marginal_spectral()


def marginal_spatial(dist):
    return dist.marginal_spatial()
