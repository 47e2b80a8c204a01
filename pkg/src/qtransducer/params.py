"""Per-transition parameters and the derived velocity/phase mismatch quantities."""
from dataclasses import dataclass, replace

import numpy as np

from .errors import InvalidArgument

TWO_PI = 2 * np.pi


@dataclass(frozen=True)
class TransitionParams:
    """Physical parameters of one optical transition.

    Velocities are stored as inverses so that a control pulse with infinite
    group velocity (inv_c_prime = 0) and matched velocities are exact.
    """
    gamma: float
    length: float
    d: float
    c: float = 0.3
    inv_c_prime: float = None
    k: float = 0.0
    k_prime: float = 0.0

    def __post_init__(self):
        for name in ("gamma", "length", "c"):
            v = getattr(self, name)
            if not (np.isfinite(v) and v > 0):
                raise InvalidArgument(f"{name} must be positive and finite")
        if not (np.isfinite(self.d) and self.d >= 0):
            raise InvalidArgument("optical depth d must be >= 0")
        if self.inv_c_prime is None:
            object.__setattr__(self, "inv_c_prime", 1.0 / self.c)
        if not (np.isfinite(self.inv_c_prime) and self.inv_c_prime >= 0):
            raise InvalidArgument("control group velocity c_prime must be positive")
        for name in ("k", "k_prime"):
            if not np.isfinite(getattr(self, name)):
                raise InvalidArgument(f"{name} must be finite")

    @property
    def c_prime(self):
        return np.inf if self.inv_c_prime == 0 else 1.0 / self.inv_c_prime

    @property
    def delta_k(self):
        return self.k_prime - self.k

    @property
    def inverse_ceff(self):
        """1/c' - 1/c (ns/m); zero for matched velocities."""
        return self.inv_c_prime - 1.0 / self.c

    @property
    def zeta(self):
        """L * inverse_ceff / (2 pi), the inverse cutoff frequency."""
        return self.length * self.inverse_ceff / TWO_PI

    @property
    def cutoff(self):
        """2 pi c_eff / L (rad/ns); infinite for matched velocities."""
        z = self.zeta
        return np.inf if z == 0 else 1.0 / z

    @property
    def transit_delay(self):
        """L / c' (ns)."""
        return self.length * self.inv_c_prime

    def mu0(self, n0):
        """Coupling constant from d = 2 pi mu0^2 n0 L / c."""
        if not n0 > 0:
            raise InvalidArgument("n0 must be positive")
        return float(np.sqrt(self.d * self.c / (TWO_PI * n0 * self.length)))

    def with_d(self, d):
        return replace(self, d=float(d))

    def with_gamma(self, gamma):
        return replace(self, gamma=float(gamma))


def optical_depth(mu0, n0, length, c):
    return TWO_PI * mu0 ** 2 * n0 * length / c


def derive(gamma, length, c=0.3, c_prime=None, k=0.0, k_prime=0.0, d=None,
           mu0=None, n0=None, cutoff=None):
    """Build TransitionParams from raw inputs.

    Exactly one of `d` or (`mu0`, `n0`) is required. The control velocity can
    be given directly (`c_prime`, may be inf) or through the cutoff frequency
    2 pi c_eff / L (`cutoff`, may be inf for matched velocities).
    """
    if (d is None) == (mu0 is None):
        raise InvalidArgument("supply exactly one of d or mu0 (with n0)")
    if mu0 is not None:
        if n0 is None or not n0 > 0:
            raise InvalidArgument("mu0 requires a positive n0")
        if not mu0 >= 0:
            raise InvalidArgument("mu0 must be >= 0")
        d = optical_depth(mu0, n0, length, c)
    if c_prime is not None and cutoff is not None:
        raise InvalidArgument("give c_prime or cutoff, not both")
    if not (np.isfinite(c) and c > 0):
        raise InvalidArgument("c must be positive and finite")
    if cutoff is not None:
        if cutoff == 0:
            raise InvalidArgument("cutoff frequency must be non-zero")
        inv = 1.0 / c + (TWO_PI / (length * cutoff) if np.isfinite(cutoff) else 0.0)
        if abs(inv) < 1e-12 / c:
            inv = 0.0
        if inv < 0:
            raise InvalidArgument(
                "cutoff frequency implies a negative control group velocity")
    elif c_prime is not None:
        if not c_prime > 0:
            raise InvalidArgument("c_prime must be positive")
        inv = 0.0 if np.isinf(c_prime) else 1.0 / c_prime
    else:
        inv = 1.0 / c
    return TransitionParams(gamma=float(gamma), length=float(length), d=float(d),
                            c=float(c), inv_c_prime=float(inv), k=float(k),
                            k_prime=float(k_prime))
