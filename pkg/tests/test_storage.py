import numpy as np
import pytest

from qtransducer.distributions import make_profile, separable
from qtransducer.errors import InvalidArgument, NumericFailure
from qtransducer.grids import GaussianPulse, make_symmetric_grid, zero_field
from qtransducer.params import derive
from qtransducer.storage import (StorageResponse, default_delay, storage_leakage,
                                 storage_response, storage_times, store_spin_wave)

L, C = 1.0, 1.0


@pytest.fixture(scope="module")
def medium():
    gamma = 0.1
    params = derive(gamma, L, c=C, d=3.0)
    dist = separable(L, make_profile("uniform", 5.0))
    pulse = GaussianPulse(-4.0, 0.5)
    grid = make_symmetric_grid(12, int(24 / (gamma / 4)) + 1)
    return params, dist, pulse, grid


def test_zero_input_gives_zero_spin_wave(medium):
    params, dist, _, grid = medium
    sw = store_spin_wave(zero_field(grid), params, dist, z=8, delta=9)
    assert sw.values.shape == (8, 9)
    assert not np.any(sw.values)


def test_spin_wave_concentrated_at_entry_edge():
    gamma = 0.02
    params = derive(gamma, L, c=C, d=20.0)
    dist = separable(L, make_profile("uniform", 10.0))
    grid = make_symmetric_grid(12, int(24 / (gamma / 4)) + 1)
    E = GaussianPulse(-L / C - 3.0, 0.5).field(grid)
    sw = store_spin_wave(E, params, dist, z=201, delta=np.linspace(-9, 9, 721))
    dens = sw.norm_profile()
    near = sw.z >= L * (1 - 3 / params.d)
    frac = np.trapezoid(np.where(near, dens, 0.0), sw.z) / np.trapezoid(dens, sw.z)
    assert frac >= 0.9


def test_energy_accounting_for_slow_decay():
    # gamma times the coherence time ~ 1e-3: stored + leaked = 1 within 2%
    gamma, tau = 0.004, 0.5
    params = derive(gamma, L, c=C, d=8.0)
    dist = separable(L, make_profile("uniform", 20.0))
    grid = make_symmetric_grid(12, int(24 / (gamma / 4)) + 1)
    E = GaussianPulse(-L / C - 6 * tau, tau).field(grid)
    sw = store_spin_wave(E, params, dist, z=64, delta=np.linspace(-12, 12, 1025))
    stored = sw.stored_norm()
    leak = storage_leakage(E, params, dist)
    assert stored + leak == pytest.approx(1.0, abs=0.02)
    assert stored <= 1.0 + 1e-3


def test_phase_grating_is_exact(medium):
    params, dist, pulse, grid = medium
    E = pulse.field(grid)
    kappa = 7.3
    z = np.linspace(0, L, 5)
    a = store_spin_wave(E, params, dist, z=z, delta=7)
    shifted = derive(params.gamma, L, c=C, d=params.d, k_prime=params.k_prime + kappa)
    b = store_spin_wave(E, shifted, dist, z=z, delta=7)
    np.testing.assert_allclose(b.values, a.values * np.exp(1j * kappa * z)[:, None],
                               rtol=1e-13, atol=1e-15)


def test_ordering_bound():
    # control slower than the photon: storage must wait L (1/c - 1/c')... here c' > c
    params = derive(0.1, L, c=1.0, c_prime=2.0, d=1.0)
    assert default_delay(params) == pytest.approx(0.5)
    with pytest.raises(InvalidArgument):
        storage_times(params, delta_t=0.4)
    t0, dt = storage_times(params)
    assert t0 + dt + L * params.inv_c_prime == pytest.approx(0.0)
    assert storage_times(derive(0.1, L, c=1.0, d=1.0)) == (-1.0, 0.0)


@pytest.mark.parametrize("shape", ["uniform", "gaussian"])
def test_response_reproduces_spin_wave(medium, shape):
    # S(z, D) = -i exp(i dk z) int dtau F(z, t0(z) - tau; D) E_in(tau)
    params, _, pulse, grid = medium
    dist = separable(L, make_profile(shape, 5.0))
    zs, ds = np.array([0.2, 0.7]), np.array([-2.0, 0.0, 1.3])
    sw = store_spin_wave(pulse.field(grid), params, dist, z=zs, delta=ds)
    taus = np.linspace(-7.5, -0.5, 1401)  # the pulse is centred at -4 with width 0.5
    for iz, z in enumerate(zs):
        R = StorageResponse(z, params, dist)
        t_front = sw.t0 + sw.delta_t + (L - z) * params.inv_c_prime
        for j, d in enumerate(ds):
            S = -1j * np.trapezoid(R(t_front - taus, d) * pulse.time(taus), taus)
            assert abs(S - sw.values[iz, j]) <= 1e-2 * abs(S)


@pytest.mark.parametrize("z", [0.0, 0.4, 0.9])
def test_response_is_causal(medium, z):
    params, dist, _, _ = medium
    t = np.linspace(-3, 3, 601)
    F = storage_response(z, t, 0.5, params, dist)
    before = t < (L - z) / C
    assert np.max(np.abs(F[before])) <= 1e-3 * np.max(np.abs(F))


def test_response_without_absorption_peaks_at_arrival():
    params = derive(0.1, L, c=C, d=1e-10)
    dist = separable(L, make_profile("gaussian", 3.0))
    z = 0.25
    t = np.linspace(-1, 3, 4001)
    F = storage_response(z, t, 0.0, params, dist) / params.mu0(dist.n0)
    k = np.argmax(np.abs(F))
    assert abs(t[k] - (L - z) / C) <= t[1] - t[0]
    assert abs(F[k]) == pytest.approx(1.0, rel=1e-3)


def test_response_rejects_aliased_times(medium):
    params, dist, _, _ = medium
    R = StorageResponse(0.5, params, dist)
    with pytest.raises(NumericFailure):
        R(np.array([R.period]), 0.0)


def test_leakage_limits():
    grid = make_symmetric_grid(12, 961)
    E = GaussianPulse(0.0, 1.0).field(grid)
    dist = separable(L, make_profile("uniform", 20.0))
    assert storage_leakage(E, derive(0.1, L, d=0.0), dist) == pytest.approx(1.0, rel=1e-12)
    # d n(w)/n0 >= 10 across the photon band
    assert storage_leakage(E, derive(0.01, L, d=10.0), dist) < 1e-3


def test_spin_wave_dump(medium, tmp_path):
    params, dist, pulse, grid = medium
    sw = store_spin_wave(pulse.field(grid), params, dist, z=3, delta=4)
    path = tmp_path / "s.csv"
    sw.dump(path)
    data = np.loadtxt(path, delimiter=",", skiprows=1)
    assert data.shape == (12, 4)
    np.testing.assert_allclose(data[:, 2] + 1j * data[:, 3], sw.values.ravel(), rtol=1e-11)
