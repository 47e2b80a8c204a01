import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtransducer.distributions import make_profile, separable, spatial_from_table
from qtransducer.errors import InvalidArgument
from qtransducer.grids import field_norm, make_symmetric_grid
from qtransducer.metrics import excitation_reference, fidelity
from qtransducer.params import derive
from qtransducer.transducer import (gaussian_excitation, load_excitation, mw_output_approx,
                                    mw_output_general, mw_output_uniform, normalize_excitation,
                                    stored_norm, tabulated_excitation)

L = 1.0


def _setup(d=2.0, cutoff=6.0, gamma=0.1, width=3.0, exc=1.0, t_c=2.0, c=1.0, n=601):
    p = derive(gamma, L, c=c, d=d, cutoff=cutoff)
    prof = make_profile("gaussian", width)
    f = normalize_excitation(gaussian_excitation(exc, t_c), prof, p)
    return p, prof, f, make_symmetric_grid(8 * max(width, exc), n)


def test_zero_excitation_gives_zero_field():
    p, prof, f, grid = _setup()
    for fn in (lambda: mw_output_uniform(f.scaled(0.0), prof, p, grid),
               lambda: mw_output_general(f.scaled(0.0), separable(L, prof), p, grid),
               lambda: mw_output_approx(f.scaled(0.0), prof, p, grid, "low_d")):
        assert field_norm(fn()) == 0.0
    z = tabulated_excitation([-1.0, 1.0], [0.0, 0.0])
    assert field_norm(mw_output_uniform(z, prof, p, grid)) == 0.0


@pytest.mark.parametrize("cutoff", [np.inf, 6.0, -20.0])
def test_general_matches_closed_form(cutoff):
    p, prof, f, grid = _setup(cutoff=cutoff, n=241)
    a = mw_output_uniform(f, prof, p, grid).amplitude
    b = mw_output_general(f, separable(L, prof), p, grid).amplitude
    assert np.max(np.abs(a - b)) <= 1e-6 * np.max(np.abs(a))


def test_constant_spatial_table_equals_uniform_medium():
    p, prof, f, grid = _setup(n=121)
    flat = separable(L, prof, spatial_from_table(L, [0.0, 0.5, 1.0], [2.0, 2.0, 2.0]))
    a = mw_output_uniform(f, prof, p, grid).amplitude
    b = mw_output_general(f, flat, p, grid).amplitude
    assert np.max(np.abs(a - b)) <= 1e-6 * np.max(np.abs(a))


def test_normalization_examples():
    p = derive(0.1, 2.0, c=0.5, d=1.0)
    prof = make_profile("uniform", 3.0)
    lo, hi = prof.support()
    flat = tabulated_excitation([lo - 1, hi + 1], [1.0, 1.0])
    assert normalize_excitation(flat, prof, p).norm ** 2 == pytest.approx(0.5 / 2.0, rel=1e-12)
    g = make_profile("gaussian", 2.0)
    f = gaussian_excitation(1.5, t_c=3.0)
    a = normalize_excitation(f, g, p)
    b = normalize_excitation(f.scaled(7.0), g, p)
    assert a.norm == pytest.approx(b.norm, rel=1e-14)
    assert stored_norm(a, g, p) == pytest.approx(1.0, rel=1e-10)
    # int n |f|^2 in closed form for a Gaussian profile and a Gaussian excitation
    G, F = 2.0, 1.5
    ov = (1 / (np.sqrt(np.pi) * G)) * np.sqrt(np.pi) / np.sqrt(1 / G ** 2 + 2 / F ** 2)
    assert a.norm ** 2 == pytest.approx(p.c / (p.length * ov), rel=1e-9)


def test_phase_mismatch_needs_general_form():
    p = derive(0.1, L, c=1.0, d=1.0, k_prime=0.5)
    prof = make_profile("gaussian", 2.0)
    f = normalize_excitation(gaussian_excitation(1.0), prof, p)
    grid = make_symmetric_grid(10, 81)
    with pytest.raises(InvalidArgument):
        mw_output_uniform(f, prof, p, grid)
    out = mw_output_general(f, separable(L, prof), p, grid)
    base = mw_output_general(f, separable(L, prof), p.__class__(**{**p.__dict__, "k_prime": 0.0}),
                             grid)
    assert field_norm(out) < field_norm(base)


def test_low_depth_limit():
    # first order in d: W = d exp(-gamma t_c) for an excitation inside a flat band
    gamma, t_c, d = 0.1, 3.0, 1e-3
    p = derive(gamma, L, c=1.0, d=d)
    prof = make_profile("uniform", 200.0)
    f = normalize_excitation(gaussian_excitation(2.0, t_c), prof, p)
    grid = make_symmetric_grid(40, 4001)
    W = field_norm(mw_output_uniform(f, prof, p, grid))
    assert W / d == pytest.approx(np.exp(-gamma * t_c), rel=2e-3)


def test_low_depth_form_within_five_percent():
    p, prof, f, grid = _setup(d=0.01)
    a = mw_output_uniform(f, prof, p, grid)
    b = mw_output_approx(f, prof, p, grid, "low_d")
    assert abs(field_norm(b) / field_norm(a) - 1) < 0.05
    assert fidelity(a, b) > 0.99


def test_large_cutoff_form():
    p, prof, f, grid = _setup(d=3.0, cutoff=1e7)
    a = mw_output_uniform(f, prof, p, grid).amplitude
    b = mw_output_approx(f, prof, p, grid, "large_cutoff").amplitude
    assert np.max(np.abs(a - b)) <= 1e-4 * np.max(np.abs(a))
    with pytest.raises(InvalidArgument):
        mw_output_approx(f, prof, p, grid, "high_d")


@pytest.mark.parametrize("shape", ["gaussian", "lorentzian"])
def test_efficiency_independent_of_c_at_fixed_cutoff(shape):
    prof = make_profile(shape, 3.0)
    grid = make_symmetric_grid(24, 481)
    W = []
    for c in (0.1, 1.0):
        p = derive(0.1, L, c=c, d=2.0, cutoff=-20.0)
        f = normalize_excitation(gaussian_excitation(1.0, 2.0), prof, p)
        W.append(field_norm(mw_output_uniform(f, prof, p, grid)))
    assert W[0] == pytest.approx(W[1], rel=1e-10)


@pytest.mark.parametrize("d, cutoff, t_c", [(0.5, 8.0, 0.0), (4.0, -30.0, 1.5), (20.0, 3.0, 4.0)])
def test_spectrum_mirror_symmetry(d, cutoff, t_c):
    # n even and f(-D) = conj f(D) give |E(-w)| = |E(w)|
    prof = make_profile("sech", 2.0)
    grid = make_symmetric_grid(16, 321)
    p = derive(0.2, L, c=1.0, d=d, cutoff=cutoff)
    f = normalize_excitation(gaussian_excitation(1.0, t_c), prof, p)
    a = np.abs(mw_output_uniform(f, prof, p, grid).amplitude)
    np.testing.assert_allclose(a, a[::-1], rtol=1e-9, atol=1e-12 * a.max())


@settings(max_examples=15, deadline=None)
@given(st.floats(0.0, 50.0), st.floats(0.5, 100.0), st.floats(0.0, 5.0))
def test_emitted_number_bounded_by_stored(d, cutoff, t_c):
    p = derive(0.1, L, c=1.0, d=d, cutoff=cutoff)
    prof = make_profile("gaussian", 2.0)
    f = normalize_excitation(gaussian_excitation(1.0, t_c), prof, p)
    grid = make_symmetric_grid(16, 641)
    assert field_norm(mw_output_uniform(f, prof, p, grid)) <= 1 + 1e-3


def test_output_reproduces_stored_shape_for_broad_emitters():
    # t_c well beyond the excitation's temporal width, so no emission is cut off before t = 0
    p = derive(1e-3, L, c=1.0, d=1.0, cutoff=1e7)
    prof = make_profile("gaussian", 40.0)
    f = normalize_excitation(gaussian_excitation(1.0, 5.0), prof, p)
    grid = make_symmetric_grid(8, 801)
    out = mw_output_uniform(f, prof, p, grid)
    assert fidelity(out, excitation_reference(f, grid)) >= 0.99


def test_load_excitation(tmp_path):
    x = np.linspace(-3, 3, 61)
    vals = np.exp(-x ** 2) * np.exp(1j * 0.5 * x)
    path = tmp_path / "f.txt"
    np.savetxt(path, np.column_stack([x, vals.real, vals.imag]))
    f = load_excitation(path)
    np.testing.assert_allclose(f(x), vals, rtol=1e-12)
    bad = tmp_path / "bad.txt"
    bad.write_text("1 2\n3 4\n")
    with pytest.raises(InvalidArgument):
        load_excitation(bad)
    with pytest.raises(InvalidArgument):
        gaussian_excitation(0.0)
    with pytest.raises(InvalidArgument):
        tabulated_excitation([0.0, 0.0], [1.0, 1.0])
