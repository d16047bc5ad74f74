from types import SimpleNamespace

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyapquant import make_scalar_field, make_vector_field
from lyapquant.levelset import Grid, Hypersurface, build_sequence, icosphere, torus
from lyapquant.stability import (ASYMPTOTIC, INCONCLUSIVE, NOT_ASYMPTOTIC, STABLE,
                                 SignConditionResult, classify_stability, criterion_values,
                                 default_margin, derivative_sign_check, sequence_is_different,
                                 sign_condition)


def test_sink_on_unit_circle(unit_circle, fields):
    r = sign_condition(unit_circle, fields["sink"], 0.0)
    assert r.violations == 0
    assert r.min_S == pytest.approx(1.0, abs=1e-3)
    S = criterion_values(unit_circle, fields["sink"])
    assert S[r.argmin_index] == r.min_S
    assert tuple(unit_circle.vertices[r.argmin_index]) == r.argmin


def test_rotation_is_tangent(unit_circle, fields):
    r = sign_condition(unit_circle, fields["rotation"], 0.0)
    assert r.violations == len(unit_circle.vertices)
    assert abs(r.min_S) < 1e-15


def test_source_points_outward(unit_circle, fields):
    r = sign_condition(unit_circle, fields["source"], 0.0)
    assert r.violations == len(unit_circle.vertices)
    assert r.min_S == pytest.approx(-1.0, abs=1e-3)


def test_nonfinite_counts_as_violation(unit_circle):
    f = make_vector_field(["-x*sqrt(0.5 - x^2 - y^2)", "-y"], 2)
    r = sign_condition(unit_circle, f, 0.0)
    assert r.violations == len(unit_circle.vertices) == r.nonfinite


def test_midpoints_double_the_samples(unit_circle, fields):
    r = sign_condition(unit_circle, fields["sink"], 0.0, sample_midpoints=True)
    assert r.samples == 2 * len(unit_circle.vertices) and r.violations == 0


def test_margin_validation(unit_circle, fields):
    with pytest.raises(ValueError):
        sign_condition(unit_circle, fields["sink"], -1.0)
    with pytest.raises(ValueError):
        sign_condition(unit_circle, make_vector_field(["-x", "-y", "-z"], 3))


def test_default_margin(circle_seq, fields):
    assert default_margin(circle_seq[0], fields["sink"]) == pytest.approx(1e-9 * np.sqrt(2), rel=1e-6)


def test_derivative_sign(unit_circle, F_circle, fields):
    d = derivative_sign_check(unit_circle, F_circle, fields["sink"])
    assert d.agreement == 1.0 and d.zero_derivative == 0 and d.identity_holds
    d = derivative_sign_check(unit_circle, F_circle, fields["source"])
    assert d.agreement == 0.0 and d.identity_holds
    d = derivative_sign_check(unit_circle, F_circle, fields["rotation"])
    assert d.agreement == 0.0 and d.zero_derivative == len(unit_circle.vertices)


def test_mesh_normals_close_to_field_normals(unit_circle, F_circle, fields):
    d = derivative_sign_check(unit_circle, F_circle, fields["sink"])
    assert d.normal_deviation < 0.02


def test_difference_on_circles(circle_seq):
    assert sequence_is_different(circle_seq) == (False, None)
    assert sequence_is_different([circle_seq[0]]) == (False, None)


def test_difference_sphere_then_torus():
    sphere = Hypersurface.from_mesh(*icosphere(2))
    ring = Hypersurface.from_mesh(*torus())
    assert sequence_is_different([sphere, ring]) == (True, (1, 2))


def _clean(n=3, s=1.0):
    return [SignConditionResult(2.0 ** -k, s, (1.0, 0.0), 0, 0, 0.0, 100) for k in range(n)]


def test_verdict_ladder():
    clean_probe = SimpleNamespace(recurrent=0, seeds=64)
    cycle_probe = SimpleNamespace(recurrent=3, seeds=64)
    assert classify_stability(_clean(), False, clean_probe, 1e-9).kind == ASYMPTOTIC
    assert classify_stability(_clean(), False, cycle_probe, 1e-9).kind == STABLE
    assert classify_stability(_clean(), False, None, 1e-9).kind == STABLE
    v = classify_stability(_clean(), True, cycle_probe, 1e-9, different_pair=(1, 2))
    assert v.kind == NOT_ASYMPTOTIC and not v.conflict_flag
    assert v.witnesses["different_pair"] == [1, 2]
    v = classify_stability(_clean(), True, clean_probe, 1e-9)
    assert v.kind == NOT_ASYMPTOTIC and v.conflict_flag


def test_violation_is_inconclusive():
    results = _clean()
    results[1] = SignConditionResult(0.5, -0.2, (0.0, 0.7), 3, 12, 0.0, 100)
    v = classify_stability(results, False, SimpleNamespace(recurrent=0, seeds=64), 1e-9)
    assert v.kind == INCONCLUSIVE
    assert v.witnesses["violations"][0]["argmin"] == [0.0, 0.7]
    assert classify_stability([], False, None, 0.0).kind == INCONCLUSIVE


def test_min_S_at_margin_is_not_strict():
    v = classify_stability(_clean(s=1e-9), False, None, 1e-9)
    assert v.kind == INCONCLUSIVE


@given(st.floats(0.01, 100.0))
@settings(max_examples=20, deadline=None)
def test_scaling_f_keeps_violations(circle_seq, c):
    base = make_vector_field(["-y - x*(x^2 + y^2)", "x - y*(x^2 + y^2)"], 2)
    scaled = base.scaled(c)
    for H in circle_seq:
        r0 = sign_condition(H, base, default_margin(circle_seq[0], base))
        r1 = sign_condition(H, scaled, default_margin(circle_seq[0], scaled))
        assert r0.violations == r1.violations
        assert r1.min_S == pytest.approx(c * r0.min_S, rel=1e-12)


def test_time_reversal_negates_S(circle_seq, fields):
    f = fields["spiral"]
    for H in circle_seq:
        assert np.array_equal(criterion_values(H, f.reversed()), -criterion_values(H, f))
    fwd = [sign_condition(H, f, 1e-9) for H in circle_seq]
    back = [sign_condition(H, f.reversed(), 1e-9) for H in circle_seq]
    assert classify_stability(fwd, False, None, 1e-9).kind == STABLE
    assert classify_stability(back, False, None, 1e-9).kind == INCONCLUSIVE


@pytest.mark.parametrize("c", [0.5, 2.0, 7.0])
def test_F_scaling_keeps_S(c, fields):
    g = Grid.cube(2.0, 256, 2)
    a = build_sequence(make_scalar_field("x^2 + 4*y^2", 2), g, 4)
    b = build_sequence(make_scalar_field(f"{c}*(x^2 + 4*y^2)", 2), g, 4)
    assert np.allclose(b.levels, c * np.array(a.levels), rtol=1e-12)
    for Ha, Hb in zip(a, b):
        assert np.allclose(Ha.vertices, Hb.vertices, atol=1e-9)
        Sa = criterion_values(Ha, fields["spiral"])
        Sb = criterion_values(Hb, fields["spiral"])
        assert np.allclose(Sa, Sb, atol=1e-6)
