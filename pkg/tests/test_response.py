import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtransducer.distributions import make_profile, separable, tabulated_distribution
from qtransducer.errors import InvalidArgument
from qtransducer.grids import GaussianPulse, make_symmetric_grid
from qtransducer.response import (ResponseCache, response_C, response_H, response_h,
                                  transmitted_intensity)
from qtransducer.transducer import gaussian_excitation, tabulated_excitation

TWO_PI = 2 * np.pi


def _dense_pole_integral(weight, lo, hi, omega, gamma, n):
    x = np.linspace(lo, hi, n)
    return np.trapezoid(weight(x) / (1j * (x - omega) + gamma / 2), x)


def test_uniform_band_centre_is_one_half():
    H = response_H(make_profile("uniform", 10.0), 1e-3, 0.0)
    assert H.real == pytest.approx(0.5, rel=1e-2)
    assert abs(H.imag) < 1e-6


def test_far_detuned_response_vanishes():
    for s in ("gaussian", "sech", "lorentzian", "uniform"):
        assert abs(response_H(make_profile(s, 1.0), 0.1, 100.0)) < 0.01


def test_gaussian_against_dense_trapezoid():
    g, gamma = TWO_PI, TWO_PI * 0.01
    p = make_profile("gaussian", g)
    # the trapezoid step resolves gamma/2 by a factor 10 beyond what converges to 1e-9
    ref = _dense_pole_integral(p, -10 * g, 10 * g, 0.0, gamma, 2_000_001) / (TWO_PI * p.peak)
    assert abs(response_H(p, gamma, 0.0) - ref) < 1e-6 * abs(ref)


def test_lorentzian_closed_form():
    # n Lorentzian of half-width a: H = (a/2) / (a + gamma/2 - i w) up to tail truncation
    g, gamma = 1.0, 0.05
    a = g / np.sqrt(np.pi)
    w = np.linspace(-3, 3, 13)
    ref = 0.5 * a / (a + gamma / 2 - 1j * w)
    np.testing.assert_allclose(response_H(make_profile("lorentzian", g), gamma, w), ref,
                               atol=2e-4)


@settings(max_examples=20, deadline=None)
@given(st.sampled_from(["gaussian", "sech", "lorentzian", "uniform"]),
       st.floats(0.2, 5.0), st.floats(1e-3, 1.0), st.floats(-20.0, 20.0))
def test_absorptive_part_nonnegative_and_hermitian(shape, width, gamma, w):
    p = make_profile(shape, width)
    H = response_H(p, gamma, np.array([w, -w]))
    assert H[0].real >= -1e-12
    assert abs(H[1] - np.conj(H[0])) <= 1e-7 * max(abs(H[0]), 1e-12) + 1e-14


def test_h_boundaries_and_factorization():
    L, gamma = 0.5, 0.2
    p = make_profile("sech", 1.5)
    dist = separable(L, p)
    w = np.array([-1.0, 0.0, 0.7])
    np.testing.assert_array_equal(response_h(L, w, dist, gamma), 0.0)
    H = response_H(p, gamma, w)
    np.testing.assert_allclose(response_h(0.0, w, dist, gamma), H, rtol=1e-12)
    z = 0.3
    np.testing.assert_allclose(response_h(z, w, dist, gamma), (L - z) / L * H, rtol=1e-12)
    with pytest.raises(InvalidArgument):
        response_h(1.2 * L, w, dist, gamma)


def test_h_tabulated_against_two_dimensional_quadrature():
    L, gamma = 1.0, 0.5
    z = np.linspace(0, L, 6)
    d = np.linspace(-5, 5, 41)
    table = np.exp(-(d[None, :] - 2 * z[:, None] + 1) ** 2) * (1 + z[:, None])
    dist = tabulated_distribution(L, z, d, table)
    zq = 0.25
    for w in (-1.0, 0.3, 2.0):
        got = response_h(zq, w, dist, gamma)
        # dense 2-D trapezoid of the bilinear G
        zz = np.linspace(zq, L, 751)
        dd = np.linspace(-5, 5, 40001)
        rows = dist.rows_at(zz)
        G = np.array([np.interp(dd, d, r) for r in rows])
        inner = np.trapezoid(G / (1j * (dd[None, :] - w) + gamma / 2), dd, axis=1)
        ref = np.trapezoid(inner, zz) / (TWO_PI * dist.n0)
        assert abs(got - ref) < 1e-5 * abs(ref)


def test_C_with_unit_excitation_equals_H():
    p = make_profile("gaussian", 2.0)
    lo, hi = p.support()
    one = tabulated_excitation([lo - 1, hi + 1], [1.0, 1.0])
    w = np.linspace(-6, 6, 25)
    H = response_H(p, 0.05, w, rtol=1e-12)
    C = response_C(p, one, 0.05, w, rtol=1e-12)
    np.testing.assert_allclose(C, H, rtol=1e-10, atol=1e-12)


def test_C_of_phase_ramp_in_broad_band():
    # f = exp(i D t_c): the pole at D = w + i gamma/2 lies inside the band, so
    # C(w) = exp(i w t_c - gamma t_c / 2) away from the band edges
    g, gamma, tc = 40.0, 0.02, 3.0
    p = make_profile("uniform", g)
    lo, hi = p.support()
    f = tabulated_excitation(np.linspace(lo, hi, 20001), np.exp(1j * np.linspace(lo, hi, 20001) * tc))
    w = np.array([-10.0, 0.0, 5.0, 12.0])
    C = response_C(p, f, gamma, w)
    ref = np.array([_dense_pole_integral(lambda x: p(x) * f(x), lo, hi, wi, gamma, 4_000_001)
                    for wi in w]) / (TWO_PI * p.peak)
    np.testing.assert_allclose(C, ref, rtol=1e-5)
    np.testing.assert_allclose(np.abs(C), np.exp(-gamma * tc / 2), rtol=2e-2)


def test_C_odd_excitation_is_principal_value():
    # n even, f odd: at w = 0 the absorptive part cancels and C(0) = -i PV int n f / D
    p = make_profile("gaussian", 1.0)
    x = np.linspace(-12, 12, 4801)
    f = tabulated_excitation(x, x * np.exp(-x ** 2 / 4))
    C = response_C(p, f, 1e-6, 0.0)
    # f / D = exp(-D^2/4) is smooth, so PV int n f / D = int n exp(-D^2/4) = (5/4)^-1/2
    ref = -1j / np.sqrt(1.25) / (TWO_PI * p.peak)
    assert abs(C.real) < 1e-5 * abs(ref)
    assert C.imag == pytest.approx(ref.imag, rel=1e-5)


def test_transmitted_intensity_zero_depth():
    g = make_symmetric_grid(10, 401)
    E = GaussianPulse(0.0, 0.5).field(g)
    I = transmitted_intensity(E, separable(1.0, make_profile("gaussian", 3.0)), 0.0, 0.1)
    np.testing.assert_array_equal(I.amplitude.real, np.abs(E.amplitude) ** 2)


def test_transmitted_intensity_delta_limit():
    G = 10.0
    gamma = G / 1e3
    g = make_symmetric_grid(6, 241)
    E = GaussianPulse(0.0, 1.0).field(g)
    dist = separable(1.0, make_profile("uniform", G))
    for d in (0.5, 2.0):
        I = transmitted_intensity(E, dist, d, gamma)
        ratio = I.amplitude.real / np.abs(E.amplitude) ** 2
        np.testing.assert_allclose(ratio, np.exp(-d), rtol=1e-3 * d + 1e-3)


@settings(max_examples=15, deadline=None)
@given(st.sampled_from(["gaussian", "sech", "lorentzian", "uniform"]), st.floats(0.3, 4.0),
       st.lists(st.floats(0, 20), min_size=2, max_size=5))
def test_transmitted_energy_monotone_in_d(shape, width, ds):
    g = make_symmetric_grid(12, 241)
    E = GaussianPulse(0.0, 0.8).field(g)
    dist = separable(1.0, make_profile(shape, width))
    vals = [np.sum(g.weights * transmitted_intensity(E, dist, d, 0.1).amplitude.real)
            for d in sorted(ds)]
    assert all(b <= a * (1 + 1e-12) for a, b in zip(vals, vals[1:]))
    assert vals[0] <= np.sum(g.weights * np.abs(E.amplitude) ** 2) * (1 + 1e-12)


def test_response_cache_reuses_values():
    p = make_profile("gaussian", 2.0)
    grid = make_symmetric_grid(10, 101)
    f = gaussian_excitation(1.0, 0.5)
    a = ResponseCache(p, 0.1, grid, f)
    b = ResponseCache(p, 0.1, grid, f)
    assert a.H is b.H and a.C is b.C
    assert not a.H.flags.writeable
    with pytest.raises(InvalidArgument):
        ResponseCache(p, 0.1, grid).C


def test_gamma_must_be_positive():
    with pytest.raises(InvalidArgument):
        response_H(make_profile("gaussian", 1.0), 0.0, 0.0)
