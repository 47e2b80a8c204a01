import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from qtransducer.errors import InvalidArgument
from qtransducer.grids import (FrequencyGrid, GaussianPulse, SpectralField, field_norm,
                               make_symmetric_grid, zero_field)
from qtransducer.metrics import (QUANTUM_CAPACITY_THRESHOLD, efficiency, fidelity, make_report,
                                 profile_reference, retrieval_probability, reversed_reference)
from qtransducer.distributions import make_profile
from qtransducer.transducer import gaussian_excitation

GRID = make_symmetric_grid(10.0, 2001)


def _pulse(t, tau=1.0, carrier=0.0):
    return GaussianPulse(t, tau, carrier).field(GRID)


def test_efficiency_examples():
    E = _pulse(0.0)
    assert efficiency(E.scaled(0.5), E) == pytest.approx(0.25, rel=1e-12)
    assert efficiency(E.scaled(1j), E) == pytest.approx(1.0, rel=1e-12)
    assert efficiency(zero_field(GRID), E) == 0.0
    assert retrieval_probability(E) == pytest.approx(1.0, rel=1e-10)


def test_unit_pulse_norm_matches_time_domain():
    t = np.linspace(-20, 20, 40001)
    p = GaussianPulse(1.0, 1.3, 0.4)
    assert np.trapezoid(np.abs(p.time(t)) ** 2, t) == pytest.approx(1.0, rel=1e-10)
    assert field_norm(p.field(GRID)) == pytest.approx(1.0, rel=1e-10)


@settings(max_examples=40, deadline=None)
@given(st.floats(0.01, 100.0), st.floats(-np.pi, np.pi), st.floats(-3.0, 3.0),
       st.floats(0.5, 2.0))
def test_fidelity_invariances(scale, phase, t_shift, tau):
    E = _pulse(t_shift, tau)
    R = _pulse(0.0, 1.0)
    f = fidelity(E, R)
    assert 0.0 <= f <= 1.0
    assert fidelity(E.scaled(scale * np.exp(1j * phase)), R) == pytest.approx(f, abs=1e-12)
    assert fidelity(R, E) == pytest.approx(f, abs=1e-12)
    assert fidelity(E, E) == pytest.approx(1.0, abs=1e-12)


def test_fidelity_of_gaussians_closed_form():
    # two unit Gaussian pulses with durations a, b overlap as sqrt(2ab / (a^2 + b^2))
    a, b = 0.8, 1.7
    assert fidelity(_pulse(0.0, a), _pulse(0.0, b)) == pytest.approx(
        np.sqrt(2 * a * b / (a * a + b * b)), rel=1e-10)


def test_disjoint_supports():
    w = GRID.points
    A = SpectralField(GRID, np.where(w < -1, 1.0, 0.0))
    B = SpectralField(GRID, np.where(w > 1, 1.0, 0.0))
    assert fidelity(A, B) == 0.0
    assert retrieval_probability(A + B) == pytest.approx(
        retrieval_probability(A) + retrieval_probability(B), rel=1e-14)


def test_zero_norm_and_grid_errors():
    E = _pulse(0.0)
    Z = zero_field(GRID)
    with pytest.raises(InvalidArgument):
        efficiency(E, Z)
    with pytest.raises(InvalidArgument):
        fidelity(Z, E)
    other = GaussianPulse(0, 1).field(make_symmetric_grid(5.0, 2001))
    with pytest.raises(InvalidArgument):
        fidelity(E, other)
    with pytest.raises(InvalidArgument):
        reversed_reference(GaussianPulse(0, 1).field(FrequencyGrid(-1.0, 3.0, 101)))


def test_references():
    E = _pulse(0.0, carrier=1.5)
    r = reversed_reference(E)
    assert GRID.points[np.argmax(r.amplitude)] == pytest.approx(-1.5, abs=GRID.spacing)
    prof = make_profile("gaussian", 2.0)
    f = gaussian_excitation(1.0, t_c=3.0)
    ref = profile_reference(prof, GRID, phase_from=f)
    np.testing.assert_allclose(np.abs(ref.amplitude), prof(GRID.points), rtol=1e-12)
    core = np.abs(GRID.points) < 2
    np.testing.assert_allclose(np.angle(ref.amplitude[core] * np.exp(-3j * GRID.points[core])),
                               0.0, atol=1e-9)


def test_report_text_and_csv():
    E = _pulse(0.0)
    rep = make_report(E.scaled(0.8), E, ref_f=E, ref_n=E, leakage=0.1)
    assert rep.efficiency == pytest.approx(0.64)
    assert rep.above_capacity_threshold
    text = rep.to_text()
    assert "efficiency=0.64" in text and "above_capacity_threshold=true" in text
    assert "grid_n_points=2001" in text
    assert len(rep.csv_row()) == len(rep.KEYS)
    low = make_report(E.scaled(0.5), E)
    assert low.efficiency < QUANTUM_CAPACITY_THRESHOLD and not low.above_capacity_threshold
    assert np.isnan(low.fidelity_f)
    empty = make_report(zero_field(GRID), E, ref_f=E)
    assert empty.efficiency == 0.0 and np.isnan(empty.fidelity_f)
