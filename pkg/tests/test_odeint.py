import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyapquant import make_vector_field
from lyapquant.odeint import (basin_radius_along_ray, classify_tail, containment_check,
                              convergence_check, halton_ball, integrate, integrate_many,
                              invariant_set_probe, radical_inverse)

BOX = ((-2.0, -2.0), (2.0, 2.0))


def test_sink_decay(fields):
    t = integrate(fields["sink"], [1.0, 0.0], 0.01, 20.0, conv_eps=0)
    k = int(round(10 / 0.01))
    assert t.times[k] == pytest.approx(10.0)
    assert np.linalg.norm(t.states[k]) == pytest.approx(4.54e-5, abs=1e-7)
    assert t.reason == "horizon"


def test_rotation_returns(fields):
    t = integrate(fields["rotation"], [1.0, 0.0], 0.001, 2 * math.pi)
    assert t.times[-1] == pytest.approx(2 * math.pi, abs=1e-12)
    assert np.linalg.norm(t.states[-1] - [1.0, 0.0]) <= 1e-6


def test_source_escapes(fields):
    assert integrate(fields["source"], [0.1, 0.0], 0.01, 100.0, BOX).reason == "escaped"


def test_converged_termination(fields):
    t = integrate(fields["sink"], [1.0, 0.0], 0.01, 100.0)
    assert t.reason == "converged"
    assert np.all(np.linalg.norm(t.states[-10:], axis=1) < 1e-4)


def test_nonfinite_termination():
    f = make_vector_field(["x^2", "0"], 2)
    t = integrate(f, [1.0, 0.0], 0.1, 50.0)
    assert t.reason == "nonfinite"
    assert np.all(np.isfinite(t.states[:-1]))


def test_times_strictly_increase(fields):
    t = integrate(fields["spiral"], [1.0, 0.5], 0.03, 1.0)
    assert np.all(np.diff(t.times) > 0) and t.times[-1] == pytest.approx(1.0)


def test_preconditions(fields):
    with pytest.raises(ValueError):
        integrate(fields["sink"], [1.0, 0.0], 0.0, 1.0)
    with pytest.raises(ValueError):
        integrate(fields["sink"], [1.0, 0.0], 0.1, 0.05)
    with pytest.raises(ValueError):
        integrate(fields["sink"], [np.nan, 0.0], 0.1, 1.0)


def test_rk4_order(fields):
    err = [abs(integrate(fields["sink"], [1.0, 0.0], dt, 1.0, conv_eps=0).states[-1, 0] - math.exp(-1))
           for dt in (0.02, 0.01)]
    assert 12 <= err[0] / err[1] <= 20


def test_batch_matches_single(fields):
    seeds = np.array([[1.0, 0.0], [0.3, -0.4], [-1.2, 0.9]])
    batch = integrate_many(fields["spiral"], seeds, 0.01, 5.0, BOX)
    for s, b in zip(seeds, batch):
        one = integrate(fields["spiral"], s, 0.01, 5.0, BOX)
        assert np.array_equal(one.states, b.states) and one.reason == b.reason


def test_determinism(fields):
    a = integrate(fields["spiral"], [1.0, 0.5], 0.01, 10.0)
    b = integrate(fields["spiral"], [1.0, 0.5], 0.01, 10.0)
    assert np.array_equal(a.states, b.states)


def test_trajectory_csv(fields, tmp_path):
    t = integrate(fields["sink"], [1.0, 0.0], 0.1, 1.0)
    t.write_csv(tmp_path / "t.csv")
    data = np.loadtxt(tmp_path / "t.csv", delimiter=",", skiprows=1)
    assert np.array_equal(data[:, 0], t.times) and np.array_equal(data[:, 1:], t.states)


# -- oracles -----------------------------------------------------------------

def test_containment(unit_circle, fields):
    assert containment_check(fields["sink"], unit_circle, 200, 0.01, 50.0, BOX).violations == 0
    assert containment_check(fields["rotation"], unit_circle, 200, 0.01, 50.0, BOX).violations == 0
    out = containment_check(fields["source"], unit_circle, 200, 0.01, 50.0, BOX)
    assert out.violations == 200 and len(out.witnesses) == 200


def test_rotation_containment_without_tolerance(unit_circle, fields):
    # the 1e-3 * diameter nudge alone exceeds the chord gap on the unit circle
    assert containment_check(fields["rotation"], unit_circle, 200, 0.01, 50.0, BOX,
                             exit_tol=0.0).violations == 0


def test_convergence(circle_seq, fields):
    assert convergence_check(fields["sink"], circle_seq, 100, 0.01, 50.0, BOX) == 1.0
    assert convergence_check(fields["rotation"], circle_seq, 100, 0.01, 50.0, BOX) == 0.0
    assert convergence_check(fields["spiral"], circle_seq, 100, 0.01, 200.0, BOX) == 1.0


def test_convergence_needs_two_levels(circle_seq, fields):
    with pytest.raises(ValueError):
        convergence_check(fields["sink"], [circle_seq[0]], 10, 0.01, 1.0)


def test_halton():
    assert [radical_inverse(i, 2) for i in (1, 2, 3, 4)] == [0.5, 0.25, 0.75, 0.125]
    assert radical_inverse(5, 3) == pytest.approx(7 / 9)
    pts = halton_ball(64, 1.5, 2)
    assert pts.shape == (64, 2) and np.all(np.linalg.norm(pts, axis=1) <= 1.5)
    assert np.array_equal(pts, halton_ball(64, 1.5, 2))
    assert halton_ball(20, 1.0, 3).shape == (20, 3)


def test_probe_sink(fields):
    p = invariant_set_probe(fields["sink"], 1.0, 64, 0.01, 100.0, BOX)
    assert (p.converged, p.recurrent) == (64, 0)
    assert p.converged + p.escaped + p.recurrent + p.undecided == p.seeds


def test_probe_rotation(fields):
    p = invariant_set_probe(fields["rotation"], 1.0, 64, 0.001, 100.0, BOX)
    assert p.recurrent >= 60 and p.converged == 0
    assert p.found_invariant_set and len(p.witnesses) == p.recurrent


def test_probe_preconditions(fields):
    from lyapquant.levelset import Grid
    with pytest.raises(ValueError):
        invariant_set_probe(fields["sink"], 1.0, 8, 0.01, 1.0)
    with pytest.raises(ValueError):
        invariant_set_probe(fields["sink"], 3.0, 16, 0.01, 1.0, Grid.cube(2.0, 16, 2))


def test_probe_vdp_small_ball():
    vdp = make_vector_field(["-y", "x - (1 - x^2)*y"], 2)
    box = ((-3.2, -3.2), (3.2, 3.2))
    p = invariant_set_probe(vdp, 0.5, 64, 0.005, 200.0, box)
    assert p.converged == 64 and p.recurrent == 0


def test_basin_bisection_brackets_cycle():
    vdp = make_vector_field(["-y", "x - (1 - x^2)*y"], 2)
    box = ((-3.2, -3.2), (3.2, 3.2))
    r = basin_radius_along_ray(vdp, [1.0, 0.0], 0.5, 3.0, 0.005, 200.0, box)
    # the Van der Pol cycle crosses the x-axis near |x| = 2.0
    assert 1.9 < r < 2.1
    with pytest.raises(ValueError):
        basin_radius_along_ray(vdp, [1.0, 0.0], 2.5, 3.0, 0.005, 200.0, box)


def test_classify_tail_cases(fields):
    circle = integrate(fields["rotation"], [1.0, 0.0], 0.01, 100.0)
    assert classify_tail(circle, 1e-3)[0] == "recurrent"
    slow = integrate(fields["spiral"], [1.0, 0.0], 0.01, 100.0)
    assert classify_tail(slow, 1e-3)[0] == "undecided"
    fixed = integrate(make_vector_field(["0", "0"], 2), [0.5, 0.5], 0.1, 10.0)
    assert classify_tail(fixed, 1e-3)[0] == "recurrent"


@given(st.floats(-3, 3).filter(lambda c: abs(c) > 1e-3), st.floats(-1, 1), st.floats(-1, 1))
@settings(max_examples=30, deadline=None)
def test_rk4_commutes_with_scaling_for_linear_fields(c, x, y):
    f = make_vector_field(["-x + 2*y", "-3*x - y"], 2)
    a = integrate(f, [x, y], 0.05, 2.0, conv_eps=0).states
    b = integrate(f, [c * x, c * y], 0.05, 2.0, conv_eps=0).states
    assert np.allclose(c * a, b, rtol=1e-12, atol=1e-14)
