import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyapquant.errors import ExprSyntaxError, NonFinite, NotEquilibrium, OriginNotZero
from lyapquant.fields import (gradient, gradient_selfcheck, make_scalar_field,
                              make_vector_field)


def test_scalar_field_gradient():
    F = make_scalar_field("x^2 + y^2", 2)
    assert np.allclose(F.grad([[1.0, -2.0]]), [[2.0, -4.0]])
    F = make_scalar_field("x^2 + 4*y^2", 2)
    assert np.allclose(gradient(F, [0.0, 1.0]), [0.0, 8.0])
    F = make_scalar_field("x^2 + y^2 + z^2", 3)
    assert np.allclose(gradient(F, [1.0, 1.0, 1.0]), [2.0, 2.0, 2.0])


def test_origin_must_be_zero():
    with pytest.raises(OriginNotZero):
        make_scalar_field("x^2 + y^2 + 1", 2)
    make_scalar_field("x^2 + y^2 + 1e-13", 2)


def test_parse_errors_propagate():
    with pytest.raises(ExprSyntaxError):
        make_scalar_field("x^^2", 2)


def test_vector_field_equilibrium():
    make_vector_field(["-x", "-y"], 2)
    make_vector_field(["y", "-x"], 2)
    make_vector_field(["0", "0"], 2)
    with pytest.raises(NotEquilibrium):
        make_vector_field(["-x+1", "-y"], 2)
    with pytest.raises(ValueError):
        make_vector_field(["-x"], 2)


def test_dimension_limits():
    with pytest.raises(ValueError):
        make_scalar_field("x", 4)


def test_gradient_nonfinite():
    F = make_scalar_field("sqrt(x^2 + y^2)", 2)
    with pytest.raises(NonFinite):
        gradient(F, [0.0, 0.0])


def test_vector_field_batch_paths_agree():
    f = make_vector_field(["-y - x*(x^2 + y^2)", "x - y*(x^2 + y^2)"], 2)
    pts = np.random.default_rng(3).uniform(-2, 2, size=(50, 2))
    assert np.array_equal(f(pts), f.rhs(pts))


def test_selfcheck_random_points():
    rng = np.random.default_rng(0)
    pts = rng.uniform(-2, 2, size=(100, 2))
    assert gradient_selfcheck(make_scalar_field("x^2 + y^2", 2), pts).max_rel_error <= 1e-6
    assert gradient_selfcheck(make_scalar_field("sin(x)*y", 2), pts).max_rel_error <= 1e-6


def test_selfcheck_skips_zero_gradient():
    r = gradient_selfcheck(make_scalar_field("x^2 + y^2", 2), [[0.0, 0.0]])
    assert r.max_rel_error == 0.0 and r.checked == 0 and r.skipped_small == 2


def test_selfcheck_counts_nonfinite():
    r = gradient_selfcheck(make_scalar_field("sqrt(x^2 + y^2)", 2), [[0.0, 0.0], [1.0, 1.0]])
    assert r.skipped_nonfinite == 2 and r.checked == 2


def test_selfcheck_rejects_bad_step():
    with pytest.raises(ValueError):
        gradient_selfcheck(make_scalar_field("x^2", 2), [[1.0, 1.0]], h=0)


@given(st.floats(0.1, 10.0))
@settings(max_examples=25, deadline=None)
def test_scaled_field_scales_gradient(c):
    F = make_scalar_field("x^2 + 4*y^2", 2)
    p = np.array([[0.3, -0.7]])
    assert np.allclose(F.scaled(c).grad(p), c * F.grad(p), rtol=1e-14)
