import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtransducer.errors import InvalidArgument
from qtransducer.grids import (FrequencyGrid, GaussianPulse, SpaceGrid, SpectralField,
                               default_grid, field_norm, make_symmetric_grid, zero_field)

TWO_PI = 2 * np.pi


def test_symmetric_grid_five_points():
    np.testing.assert_array_equal(make_symmetric_grid(10, 5).points, [-10, -5, 0, 5, 10])


def test_symmetric_grid_three_points():
    np.testing.assert_array_equal(make_symmetric_grid(1, 3).points, [-1, 0, 1])


def test_symmetric_grid_spacing_for_broad_line():
    g = make_symmetric_grid(8 * TWO_PI * 20, 4001)
    assert g.spacing == pytest.approx(2 * 8 * TWO_PI * 20 / 4000)
    assert g.spacing == pytest.approx(0.5027, abs=1e-4)


@pytest.mark.parametrize("half, n", [(0, 5), (-1, 5), (1, 4), (1, 1), (1, 2.5)])
def test_symmetric_grid_rejects_bad_input(half, n):
    with pytest.raises(InvalidArgument):
        make_symmetric_grid(half, n)


@pytest.mark.parametrize("lo, hi, n", [(1, 1, 3), (2, 1, 3), (0, 1, 1), (0, np.inf, 3)])
def test_frequency_grid_invariants(lo, hi, n):
    with pytest.raises(InvalidArgument):
        FrequencyGrid(lo, hi, n)


def test_space_grid_includes_endpoints():
    g = SpaceGrid(0.01, 11)
    assert g.points[0] == 0 and g.points[-1] == 0.01
    assert g.weights.sum() == pytest.approx(0.01)
    with pytest.raises(InvalidArgument):
        SpaceGrid(0.0, 3)
    with pytest.raises(InvalidArgument):
        SpaceGrid(1.0, 1)


def test_field_norm_zero():
    assert field_norm(zero_field(make_symmetric_grid(1, 11))) == 0.0


def test_field_norm_normalized_gaussian():
    g = make_symmetric_grid(40, 4001)
    assert field_norm(GaussianPulse(0.3, 1.0).field(g)) == pytest.approx(1.0, abs=1e-6)


def test_field_norm_doubles_quadratically():
    g = make_symmetric_grid(40, 4001)
    E = GaussianPulse(0.0, 1.0).field(g)
    assert field_norm(E.scaled(2.0)) == pytest.approx(4 * field_norm(E), rel=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False))
def test_field_norm_scales_with_modulus_squared(alpha):
    g = make_symmetric_grid(20, 801)
    E = GaussianPulse(1.0, 0.7, carrier=0.5).field(g)
    assert field_norm(E.scaled(alpha)) == pytest.approx(abs(alpha) ** 2 * field_norm(E),
                                                        rel=1e-12, abs=1e-300)


@settings(max_examples=50, deadline=None)
@given(st.floats(1e-3, 1e4), st.integers(1, 2000))
def test_symmetric_grid_closed_under_negation(half, k):
    g = make_symmetric_grid(half, 2 * k + 1)
    p = g.points
    np.testing.assert_allclose(-p[::-1], p, atol=1e-12 * half)
    assert p[k] == 0.0
    assert g.is_symmetric()


def test_default_grid_resolution_policy():
    g = default_grid([TWO_PI * 20, TWO_PI], gamma=TWO_PI * 0.01)
    assert g.omega_max == pytest.approx(8 * TWO_PI * 20)
    assert g.spacing <= TWO_PI / 50
    assert g.n_points % 2 == 1
    r = default_grid([1.0], gamma=0.1, resolve_gamma=True)
    assert r.spacing <= 0.1 / 4


def test_spectral_field_validation():
    g = make_symmetric_grid(1, 5)
    with pytest.raises(InvalidArgument):
        SpectralField(g, np.zeros(4))
    with pytest.raises(InvalidArgument):
        SpectralField(g, [0, 0, np.nan, 0, 0])
    E = SpectralField(g, np.ones(5))
    with pytest.raises(ValueError):
        E.amplitude[0] = 2.0
    with pytest.raises(InvalidArgument):
        E + SpectralField(make_symmetric_grid(2, 5), np.ones(5))


def test_pulse_spectrum_matches_numeric_transform():
    # E(w) = (2 pi)^-1/2 int exp(i w t) E(t) dt, evaluated by brute force
    p = GaussianPulse(1.5, 0.6, carrier=2.0)
    t = np.linspace(-15, 15, 60001)
    for w in (-1.0, 0.0, 2.0, 3.3):
        num = np.trapezoid(np.exp(1j * w * t) * p.time(t), t) / np.sqrt(TWO_PI)
        assert abs(num - p.spectrum(w)) < 1e-10
