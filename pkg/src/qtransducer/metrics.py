"""Efficiency, retrieval probability and spectral fidelity."""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .grids import SpectralField, field_norm

QUANTUM_CAPACITY_THRESHOLD = 0.5


def _check_same_grid(a, b):
    if a.grid != b.grid:
        raise InvalidArgument("fields live on different grids")


def efficiency(E_out, E_in):
    """Outgoing over incoming photon number."""
    _check_same_grid(E_out, E_in)
    n_in = field_norm(E_in)
    if not n_in > 0:
        raise InvalidArgument("input field has zero norm")
    return field_norm(E_out) / n_in


def retrieval_probability(E_out):
    """Photon number of the output field (equals efficiency for a unit-norm input)."""
    return field_norm(E_out)


def fidelity(E_out, reference):
    """|<E_out, E_ref>| / (|E_out| |E_ref|) with trapezoid inner products."""
    _check_same_grid(E_out, reference)
    w = E_out.grid.weights
    a = field_norm(E_out)
    b = field_norm(reference)
    if not (a > 0 and b > 0):
        raise InvalidArgument("fidelity needs two non-zero fields")
    ov = abs(np.sum(w * np.conj(E_out.amplitude) * reference.amplitude))
    return float(min(ov / np.sqrt(a * b), 1.0))


def excitation_reference(excitation, grid):
    """Reference spectrum proportional to the stored amplitude f(w)."""
    return SpectralField(grid, excitation(grid.points))


def profile_reference(profile, grid, phase_from=None):
    """Reference spectrum proportional to n(w).

    With `phase_from` (an excitation) the reference carries the phase of f(w),
    i.e. the emission-time phase exp(i w t_c) imprinted by the stored state.
    """
    amp = profile(grid.points).astype(complex)
    if phase_from is not None:
        amp = amp * np.exp(1j * np.angle(phase_from(grid.points)))
    return SpectralField(grid, amp)


def reversed_reference(E_in):
    """|E_in(-w)| on the same (symmetric) grid."""
    if not E_in.grid.is_symmetric():
        raise InvalidArgument("frequency reversal needs a symmetric grid")
    return SpectralField(E_in.grid, np.abs(E_in.amplitude[::-1]))


@dataclass
class MetricsReport:
    efficiency: float
    retrieval_probability: float
    fidelity_f: float = float("nan")
    fidelity_n: float = float("nan")
    leakage: float = 0.0
    grid: dict = field(default_factory=dict)
    flags: tuple = ()

    KEYS = ("efficiency", "retrieval_probability", "fidelity_f", "fidelity_n", "leakage")

    @property
    def above_capacity_threshold(self):
        return self.efficiency > QUANTUM_CAPACITY_THRESHOLD

    def values(self):
        return [getattr(self, k) for k in self.KEYS]

    def to_text(self):
        lines = [f"{k}={v:.12g}" for k, v in zip(self.KEYS, self.values())]
        lines.append(f"above_capacity_threshold={str(self.above_capacity_threshold).lower()}")
        for k, v in self.grid.items():
            lines.append(f"grid_{k}={v}")
        if self.flags:
            lines.append("flags=" + ",".join(self.flags))
        return "\n".join(lines) + "\n"

    def csv_row(self):
        return [f"{v:.12g}" for v in self.values()]


def make_report(E_out, E_in=None, ref_f=None, ref_n=None, leakage=0.0):
    W = retrieval_probability(E_out)
    eta = efficiency(E_out, E_in) if E_in is not None else W
    ff = fidelity(E_out, ref_f) if (ref_f is not None and W > 0) else float("nan")
    fn = fidelity(E_out, ref_n) if (ref_n is not None and W > 0) else float("nan")
    g = E_out.grid
    return MetricsReport(eta, W, ff, fn, leakage,
                         {"omega_min": g.omega_min, "omega_max": g.omega_max,
                          "n_points": g.n_points}, E_out.flags)
