"""Time-domain Maxwell-Bloch integrator used as an independent reference.

Fields travel on characteristics through Nz cells; polarizations sit at cell
centres on a uniform detuning comb. One step of length dt:

  1. free polarization evolution exp(-(i D + gamma/2) dt/2) (exact),
  2. field/polarization coupling along the characteristic crossing the cell,
     solved with the implicit midpoint rule (norm preserving for gamma = 0),
  3. second free half step.

At unit Courant number the transport is exact. Control pulses are
instantaneous maps applied as their fronts sweep the cells.
"""
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument, NumericFailure
from .grids import FrequencyGrid, SpectralField, field_norm
from .retrieval import BroadeningMap

TWO_PI = 2 * np.pi
EVENT_KINDS = ("store", "retrieve", "detuning_map")


@dataclass(frozen=True)
class ProtocolEvent:
    """Instantaneous control pulse.

    store: backward pulse reaching z at t_ref + (L - z) inv_velocity, maps
    P -> S = -i exp(i k' z) P. retrieve: forward pulse reaching z at
    t_ref + z inv_velocity, maps S -> P = -i exp(i k' z) S after the
    detuning map. detuning_map only sets the map used by later retrievals.
    """
    kind: str
    t_ref: float = 0.0
    inv_velocity: float = 0.0
    k_prime: float = 0.0
    bmap: BroadeningMap = None

    def __post_init__(self):
        if self.kind not in EVENT_KINDS:
            raise InvalidArgument(f"unknown event kind {self.kind!r}")
        if self.inv_velocity < 0:
            raise InvalidArgument("control velocity must be positive")

    def front_times(self, z, length):
        if self.kind == "store":
            return self.t_ref + (length - z) * self.inv_velocity
        return self.t_ref + z * self.inv_velocity


@dataclass
class OracleConfig:
    length: float
    t_start: float
    t_end: float
    storage: object = None
    G_S: object = None
    retrieval: object = None
    G_R: object = None
    input_field: object = None          # callable E_in(t) entering at z = L
    initial_excitation: object = None   # StoredExcitation loaded before retrieval
    n_z: int = 256
    courant: float = 1.0
    n_delta: int = None
    delta_points_min: int = 64
    recurrence_factor: float = 1.5
    check_every: int = 64


@dataclass
class TimeDomainState:
    t: float
    E_f: np.ndarray
    E_b: np.ndarray
    P: np.ndarray
    P_storage: np.ndarray
    S: np.ndarray


@dataclass
class OracleResult:
    times: np.ndarray
    output: np.ndarray        # forward field at z = L
    transmitted: np.ndarray   # backward field at z = 0
    z: np.ndarray
    delta: np.ndarray
    spin_wave: np.ndarray     # S just after the storage pulse has crossed the medium
    state: TimeDomainState
    dt: float
    info: dict = field(default_factory=dict)

    def spectrum(self, grid, which="output"):
        vals = self.output if which == "output" else self.transmitted
        return time_to_spectrum(self.times, vals, grid)

    def energy(self, which="output"):
        vals = self.output if which == "output" else self.transmitted
        return float(np.sum(np.abs(vals) ** 2) * self.dt)

    def dump(self, path, which="output", precision=12):
        vals = self.output if which == "output" else self.transmitted
        np.savetxt(path, np.column_stack([self.times, vals.real, vals.imag]),
                   fmt=f"%.{precision}g", delimiter=",", header="t,re,im", comments="")


def time_to_spectrum(times, values, grid):
    """(2 pi)^-1/2 sum dt exp(i w t) E(t) on a uniform time grid."""
    dt = times[1] - times[0]
    w = grid.points
    out = np.empty(w.size, complex)
    step = max(1, (1 << 22) // max(times.size, 1))
    for i0 in range(0, w.size, step):
        out[i0:i0 + step] = np.exp(1j * np.outer(w[i0:i0 + step], times)) @ values
    return SpectralField(grid, out * dt / np.sqrt(TWO_PI))


def _oracle_support(dist):
    prof = dist.spectral
    lo, hi = prof.support()
    if prof.shape in ("gaussian", "sech"):
        # 7 widths leave e^-49 (gaussian) of the density; enough for a comb
        lo, hi = prof.center - 7 * prof.width, prof.center + 7 * prof.width
    return lo, hi


def detuning_nodes(config):
    """Symmetric uniform midpoint comb covering all distributions involved."""
    dists = [g for g in (config.G_S, config.G_R) if g is not None]
    X = max(max(abs(v) for v in _oracle_support(g)) for g in dists)
    window = config.t_end - config.t_start
    if config.n_delta is not None:
        m = int(config.n_delta)
    else:
        step = TWO_PI / (config.recurrence_factor * window)
        m = int(np.ceil(2 * X / step))
    m = max(m, config.delta_points_min)
    m += m % 2
    edges = np.linspace(-X, X, m + 1)
    return 0.5 * (edges[1:] + edges[:-1]), edges[1] - edges[0]


def _weights(dist, z, delta, ddelta):
    """G(z_i, D_j) dD on cell centres and comb nodes."""
    if dist.is_separable:
        return dist.spatial(z)[:, None] * dist.spectral(delta)[None, :] * ddelta
    return dist.evaluate(z[:, None], delta[None, :]) * ddelta


class _Side:
    """One transition: polarization, field and precomputed step factors."""

    def __init__(self, params, dist, z, delta, ddelta, dt, dz, backward):
        self.params = params
        self.backward = backward
        self.dt = dt
        g = params.gamma
        a = 1j * delta + 0.5 * g
        self.half = np.exp(-0.5 * a * dt)
        x = 0.5 * a * dt
        kappa = dt * np.where(np.abs(x) < 1e-8, 1.0, np.sinh(x) / np.where(x == 0, 1, x))
        self.a = a
        self.w = _weights(dist, z, delta, ddelta)
        mu0 = params.mu0(dist.n0)
        L = params.length
        self.A = 1j * mu0 * L * kappa[None, :] * self.w   # includes G weights
        self.B = 1j * mu0 * kappa                          # per detuning
        self.S2 = np.sum(self.A * self.B[None, :], axis=1)
        self.courant = params.c * dt / dz
        if self.courant > 1 + 1e-12:
            raise InvalidArgument(f"CFL violated: c dt / dz = {self.courant:.6g} > 1")
        self.dz = dz
        self.P = np.zeros((z.size, delta.size), complex)
        self.E = np.zeros(z.size, complex)   # value entering each cell this step
        self.pol_norm_w = params.length / params.c * dz * self.w

    def couple(self):
        S1 = np.sum(self.A * self.P, axis=1)
        X = (2 * self.E + S1) / (1 - 0.25 * self.S2)
        self.P += 0.5 * X[:, None] * self.B[None, :]
        return X - self.E

    def transport(self, E_exit, boundary):
        c = self.courant
        if self.backward:
            shifted = np.concatenate([E_exit[1:], [boundary]])
        else:
            shifted = np.concatenate([[boundary], E_exit[:-1]])
        self.E = shifted if c >= 1 - 1e-12 else (1 - c) * E_exit + c * shifted
        return E_exit[0] if self.backward else E_exit[-1]

    def energy(self):
        return float(np.sum(np.abs(self.E) ** 2) * self.dz / self.params.c
                     + np.sum(self.pol_norm_w * np.abs(self.P) ** 2))


def protocol_events(config, T_S=0.0, t0=None, delta_t=None, bmap="negate"):
    """Store and retrieve events with the storage front leaving z = 0 at t = 0."""
    from .storage import storage_times
    events = []
    L = config.length
    if config.storage is not None and config.input_field is not None:
        t0, delta_t = storage_times(config.storage, t0, delta_t)
        events.append(ProtocolEvent("store", t0 + delta_t, config.storage.inv_c_prime,
                                    config.storage.k_prime))
    if config.retrieval is not None:
        if isinstance(bmap, str):
            bmap = BroadeningMap(bmap)
        events.append(ProtocolEvent("retrieve", T_S, config.retrieval.inv_c_prime,
                                    config.retrieval.k_prime, bmap))
    del L
    return events


def integrate_maxwell_bloch(config, events):
    """Run the protocol and record the boundary fields."""
    L = config.length
    nz = int(config.n_z)
    if nz < 2:
        raise InvalidArgument("n_z must be >= 2")
    if not 0 < config.courant <= 1:
        raise InvalidArgument(f"CFL violated: courant number {config.courant} not in (0, 1]")
    if not config.t_end > config.t_start:
        raise InvalidArgument("t_end must exceed t_start")
    dz = L / nz
    z = (np.arange(nz) + 0.5) * dz
    cmax = max(p.c for p in (config.storage, config.retrieval) if p is not None)
    dt = config.courant * dz / cmax
    delta, ddelta = detuning_nodes(config)
    m = delta.size
    n0 = int(np.floor(config.t_start / dt))
    n1 = int(np.ceil(config.t_end / dt))
    times = (np.arange(n0, n1) + 1) * dt   # sample times of the exit values

    sto = _Side(config.storage, config.G_S, z, delta, ddelta, dt, dz, True) \
        if config.storage is not None else None
    ret = _Side(config.retrieval, config.G_R, z, delta, ddelta, dt, dz, False) \
        if config.retrieval is not None else None
    S = np.zeros((nz, m), complex)
    if config.initial_excitation is not None:
        S[:] = 1j * config.initial_excitation(delta)[None, :]

    events = sorted(events, key=lambda e: e.front_times(np.array([0.0, L]), L).min())
    bmap = BroadeningMap("negate")
    pending = []
    for ev in events:
        if ev.kind == "detuning_map":
            bmap = ev.bmap
            continue
        if ev.kind == "store" and sto is None:
            raise InvalidArgument("store event without a storage transition")
        if ev.kind == "retrieve" and ret is None:
            raise InvalidArgument("retrieve event without a retrieval transition")
        pending.append((ev, ev.front_times(z, L), ev.bmap or bmap))

    fired = [np.zeros(nz, bool) for _ in pending]
    store_done_at = None
    spin_snapshot = None
    out = np.zeros(times.size, complex)
    trans = np.zeros(times.size, complex)
    inp = config.input_field
    if sto is not None and inp is not None:
        sto.E[-1] = inp(n0 * dt)
    ledger = {"out": 0.0, "in": 0.0}
    if sto is not None and inp is not None:
        ledger["in"] = abs(sto.E[-1]) ** 2 * dt
    last_total = None
    retrieval_started = False
    event_since_check = False

    for step in range(times.size):
        t_n = (n0 + step) * dt
        t_mid = t_n + 0.5 * dt
        active_events = []
        for k, (ev, tau, emap) in enumerate(pending):
            mask = (~fired[k]) & (tau < t_n + dt)
            if np.any(mask):
                active_events.append((k, ev, tau, emap, mask))

        if sto is not None:
            sto.P *= sto.half[None, :]
            E_exit = sto.couple()
            for k, ev, tau, emap, mask in active_events:
                if ev.kind != "store":
                    continue
                corr = np.exp(-np.outer(tau[mask] - t_mid, sto.a))
                ph = np.exp(1j * ev.k_prime * z[mask])[:, None]
                S[mask] += -1j * ph * corr * sto.P[mask]
                sto.P[mask] = 0.0
                fired[k] |= mask
                if fired[k].all():
                    store_done_at = step
                    spin_snapshot = S.copy()
            sto.P *= sto.half[None, :]
            boundary = inp(t_n + dt) if inp is not None else 0.0
            trans[step] = sto.transport(E_exit, boundary)

        if ret is not None:
            ret.P *= ret.half[None, :]
            for k, ev, tau, emap, mask in active_events:
                if ev.kind != "retrieve":
                    continue
                corr = np.exp(-np.outer(t_mid - tau[mask], ret.a))
                ph = np.exp(1j * ev.k_prime * z[mask])[:, None]
                src = -1j * ph * S[mask]
                if emap.kind == "negate":
                    src = src[:, ::-1]
                elif emap.kind == "uncorrelated":
                    g0 = emap.g0(delta)
                    g0 = g0 / np.sum(g0)
                    src = np.repeat(np.sum(src * g0[None, :], axis=1, keepdims=True), m, axis=1)
                # emitter class j lands on retrieval node p(j); the comb is symmetric
                ret.P[mask] += corr * src
                S[mask] = 0.0
                fired[k] |= mask
                retrieval_started = True
            E_exit = ret.couple()
            ret.P *= ret.half[None, :]
            out[step] = ret.transport(E_exit, 0.0)

        ledger["out"] += (abs(out[step]) ** 2 + abs(trans[step]) ** 2) * dt
        if inp is not None:
            ledger["in"] += abs(inp(t_n + dt)) ** 2 * dt
        event_since_check |= bool(active_events)
        if step % config.check_every == 0 or step == times.size - 1:
            total = _total(sto, ret, S, config, dz, delta, ddelta, z) + ledger["out"] - ledger["in"]
            if not np.isfinite(total):
                raise NumericFailure("time-domain state became non-finite")
            if last_total is not None and not event_since_check:
                # relative to the energy ever present, not a possibly tiny current total
                scale = max(abs(last_total), ledger["in"], 1e-300)
                growth = (total - last_total) / scale
                if growth > 1e-6 * config.check_every:
                    raise NumericFailure("excitation grew without drive", error_estimate=growth)
            last_total = total
            event_since_check = False

    if spin_snapshot is None:
        spin_snapshot = S.copy()
    state = TimeDomainState(times[-1] if times.size else config.t_start,
                            ret.E.copy() if ret is not None else np.zeros(nz, complex),
                            sto.E.copy() if sto is not None else np.zeros(nz, complex),
                            ret.P.copy() if ret is not None else np.zeros((nz, m), complex),
                            sto.P.copy() if sto is not None else np.zeros((nz, m), complex),
                            S.copy())
    info = {"n_z": nz, "n_delta": m, "dt": dt, "steps": times.size,
            "store_done_step": store_done_at, "retrieval_started": retrieval_started}
    return OracleResult(times, out, trans, z, delta, spin_snapshot, state, dt, info)


def _total(sto, ret, S, config, dz, delta, ddelta, z):
    tot = 0.0
    if sto is not None:
        tot += sto.energy()
        tot += float(np.sum(sto.pol_norm_w * np.abs(S) ** 2))
    elif config.G_R is not None and ret is not None:
        w = _weights(config.G_R, z, delta, ddelta)
        tot += float(np.sum(config.length / config.retrieval.c * dz * w * np.abs(S) ** 2))
    if ret is not None:
        tot += ret.energy()
    return tot


@dataclass
class DeviationReport:
    rel_l2: float
    delta_W: float
    W_oracle: float
    W_spectral: float
    warnings: list = field(default_factory=list)
    runtime: float = 0.0

    def to_text(self):
        lines = [f"rel_l2={self.rel_l2:.6g}", f"delta_W={self.delta_W:.6g}",
                 f"W_oracle={self.W_oracle:.12g}", f"W_spectral={self.W_spectral:.12g}",
                 f"runtime_s={self.runtime:.3f}"]
        lines += [f"warning={w}" for w in self.warnings]
        return "\n".join(lines) + "\n"


def relative_l2(a, b):
    """||a - b|| / ||b|| with trapezoid weights (0 when both vanish)."""
    w = b.grid.weights
    nb = np.sqrt(np.sum(w * np.abs(b.amplitude) ** 2))
    nd = np.sqrt(np.sum(w * np.abs(a.amplitude - b.amplitude) ** 2))
    if nb == 0:
        return 0.0 if nd == 0 else np.inf
    return float(nd / nb)


@dataclass
class ComparisonConfig:
    """Scenario for the oracle cross-check.

    scenario: 'leakage' (storage only, compares the transmitted field),
    'crib' (store + retrieve with the general kernel), 'transduce'
    (stored excitation retrieved on the optical transition).
    """
    scenario: str
    grid: FrequencyGrid
    oracle: OracleConfig
    T_S: float = 0.0
    bmap: str = "negate"
    input_pulse: object = None
    excitation: object = None


def compare_with_spectral(cfg):
    """Run both pipelines and report their deviation."""
    import time
    import warnings as _w

    from .response import transmitted_field
    from .retrieval import apply_kernel, build_kernel_general
    from .transducer import mw_output_general

    t_start = time.perf_counter()
    oc = cfg.oracle
    warns = []
    if cfg.scenario == "leakage":
        oc.input_field = cfg.input_pulse.time
        events = []
        res = integrate_maxwell_bloch(oc, events)
        E_or = res.spectrum(cfg.grid, "transmitted")
        E_sp = transmitted_field(cfg.input_pulse.field(cfg.grid), oc.G_S, oc.storage)
    elif cfg.scenario == "crib":
        oc.input_field = cfg.input_pulse.time
        bmap = BroadeningMap(cfg.bmap) if isinstance(cfg.bmap, str) else cfg.bmap
        events = protocol_events(oc, cfg.T_S, bmap=bmap)
        res = integrate_maxwell_bloch(oc, events)
        E_or = res.spectrum(cfg.grid, "output")
        K = build_kernel_general(oc.storage, oc.retrieval, oc.G_S, oc.G_R, bmap, cfg.T_S,
                                 cfg.grid, cfg.grid)
        with _w.catch_warnings(record=True) as caught:
            _w.simplefilter("always")
            E_sp = apply_kernel(K, cfg.input_pulse.field(cfg.grid))
        warns += [str(c.message) for c in caught]
    elif cfg.scenario == "transduce":
        oc.initial_excitation = cfg.excitation
        events = protocol_events(oc, 0.0, bmap=BroadeningMap("identity"))
        res = integrate_maxwell_bloch(oc, events)
        E_or = res.spectrum(cfg.grid, "output")
        E_sp = mw_output_general(cfg.excitation, oc.G_R, oc.retrieval, cfg.grid,
                                 include_exit_phase=True)
    else:
        raise InvalidArgument(f"unknown scenario {cfg.scenario!r}")
    gamma = min(p.gamma for p in (oc.storage, oc.retrieval) if p is not None)
    if cfg.scenario == "crib" and cfg.grid.spacing > gamma / 4:
        warns.append(f"grid spacing {cfg.grid.spacing:.3g} exceeds gamma/4 = {gamma / 4:.3g}")
    W_or, W_sp = field_norm(E_or), field_norm(E_sp)
    rel = relative_l2(E_or, E_sp) if (W_or > 0 or W_sp > 0) else 0.0
    rep = DeviationReport(rel, abs(W_or - W_sp), W_or, W_sp, warns,
                          time.perf_counter() - t_start)
    rep.oracle_result = res
    rep.spectral = E_sp
    rep.oracle_spectrum = E_or
    return rep
