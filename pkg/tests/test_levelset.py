import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from lyapquant import make_scalar_field
from lyapquant.errors import NoRegularLevel, NestingViolation, Unsupported
from lyapquant.levelset import (Grid, Hypersurface, HypersurfaceSequence, build_sequence,
                                extract_level_component, icosphere,
                                local_definiteness_probe, read_loop_csv, read_obj,
                                select_regular_levels, topology_signature, torus,
                                write_loop_csv, write_obj)
from lyapquant.levelset import geometry as geo


# -- grid ---------------------------------------------------------------------

def test_grid_rejects_origin_outside():
    with pytest.raises(ValueError):
        Grid((0.5, -2.0), (2.0, 2.0), 256)


def test_grid_rejects_coarse_resolution():
    with pytest.raises(ValueError):
        Grid.cube(1.0, 8, 2)


# -- single level extraction --------------------------------------------------

def test_unit_circle(unit_circle):
    H = unit_circle
    r = np.linalg.norm(H.vertices, axis=1)
    assert np.max(np.abs(r - 1)) <= 1e-3
    assert H.sign == "-"
    assert H.chi == 0
    assert H.diameter == pytest.approx(2.0, abs=2e-3)
    assert H.enclosed_measure == pytest.approx(math.pi, abs=1e-2)
    assert topology_signature(H) == (1, 0)


def test_unit_circle_is_single_directed_cycle(unit_circle):
    f = unit_circle.facets
    assert np.array_equal(f[:, 1], np.roll(f[:, 0], -1))


def test_ellipse():
    F = make_scalar_field("x^2 + 4*y^2", 2)
    H = extract_level_component(F, 4.0, Grid.cube(3.0, 256, 2))
    assert H.diameter == pytest.approx(4.0, abs=4e-3)
    assert H.enclosed_measure == pytest.approx(2 * math.pi, abs=1e-2)


@pytest.mark.parametrize("a", [2.0, 1.0, 0.5])
def test_vertex_residual(F_circle, grid2, a):
    H = extract_level_component(F_circle, a, grid2)
    assert np.max(np.abs(F_circle.value(H.vertices) - a)) <= 5e-4 * max(1.0, a)


def test_normals_unit_and_inward(unit_circle):
    H = unit_circle
    assert np.allclose(np.linalg.norm(H.normals, axis=1), 1.0, atol=1e-9)
    step = 1e-4 * H.diameter * H.normals
    assert H.contains(H.vertices + step).all()
    assert not H.contains(H.vertices - step).any()


def test_origin_inside_not_on_surface(unit_circle):
    assert unit_circle.contains(np.zeros((1, 2)))[0]
    assert np.linalg.norm(unit_circle.vertices, axis=1).min() > 0


def test_epsilon_flips_with_sign_of_F(grid2):
    H = extract_level_component(make_scalar_field("-(x^2 + y^2)", 2), -1.0, grid2)
    assert H.sign == "+"


def test_sphere():
    F = make_scalar_field("x^2 + y^2 + z^2", 3)
    H = extract_level_component(F, 1.0, Grid.cube(2.0, 96, 3))
    assert H.chi == 2
    assert H.diameter == pytest.approx(2.0, abs=0.01)
    assert H.sign == "-"
    assert geo.is_closed(len(H.vertices), H.facets)


def test_level_must_be_nonzero(F_circle, grid2):
    with pytest.raises(ValueError):
        extract_level_component(F_circle, 0.0, grid2)


# -- ladders and sequences ----------------------------------------------------

def test_ladder_starts_at_half_boundary_minimum(F_circle, grid2):
    levels = select_regular_levels(F_circle, grid2, 8, 0.5)
    assert levels == pytest.approx([2.0 * 0.5 ** k for k in range(8)])
    assert select_regular_levels(F_circle, grid2, 2, 0.5) == pytest.approx([2.0, 1.0])


def test_ladder_boundary_minimum_by_scan(F_circle, grid2):
    nodes = grid2.nodes()[grid2.boundary_mask()]
    assert 0.5 * F_circle.value(nodes).min() == pytest.approx(2.0)


def test_saddle_rung_is_perturbed():
    # F has a saddle at (-4/3, 0) with F = 16/27 ~ 0.5926; with the box chosen
    # below the ladder's top rung lands exactly on that critical value
    F = make_scalar_field("x^2 + y^2 + 0.5*x^3", 2)
    g = Grid((-1.6, -1.6), (1.6, 1.6), 200)
    crit = 16 / 27
    xs = np.linspace(-1.6, 1.6, 801)
    X, Y = np.meshgrid(xs, xs, indexing="ij")
    gn = np.linalg.norm(F.grad(np.stack([X, Y], -1)), axis=-1)
    k = np.unravel_index(np.argmin(np.where(X < -1, gn, np.inf)), gn.shape)
    assert (X[k], Y[k]) == pytest.approx((-4 / 3, 0.0), abs=5e-3)
    try:
        levels = select_regular_levels(F, g, 3, 0.5, max_level=crit)
    except NoRegularLevel:
        return
    assert levels[0] != crit


def test_sequence_circles(circle_seq):
    seq = circle_seq
    assert len(seq) == 8
    radii = np.sqrt(seq.levels)
    assert np.allclose(seq.diameters, 2 * radii, rtol=2e-3)
    assert all(np.diff(seq.diameters) < 0)
    assert seq.diameters[-1] / seq.diameters[0] < 0.15
    assert set(seq.certificates.values()) == {1.0}
    assert len(seq.certificates) == 28


def test_nesting_is_transitive(circle_seq):
    seq = circle_seq
    for i in range(len(seq)):
        for j in range(i + 1, len(seq)):
            for k in range(j + 1, len(seq)):
                assert seq[j].contains(seq[k].vertices).all()
                assert seq[i].contains(seq[k].vertices).all()


def test_sequence_ellipses():
    F = make_scalar_field("x^2 + 4*y^2", 2)
    seq = build_sequence(F, Grid.cube(3.0, 256, 2), 6, 0.5)
    assert [H.chi for H in seq] == [0] * 6


def test_sequence_requires_two(F_circle, grid2):
    with pytest.raises(ValueError):
        build_sequence(F_circle, grid2, 1)


def test_nesting_violation_detected(unit_circle, grid2):
    # level 0.5 of F/4 is the circle of radius sqrt(2), outside the unit circle
    big = extract_level_component(make_scalar_field("(x^2 + y^2)/4", 2), 0.5, grid2)
    with pytest.raises(NestingViolation):
        HypersurfaceSequence([unit_circle, big]).verify()


def test_level_through_grid_nodes(grid2):
    # r = 0.5 passes exactly through nodes of the 1/64 lattice
    for text, a in (("x^2 + y^2", 0.25), ("-(x^2 + y^2)", -0.25)):
        H = extract_level_component(make_scalar_field(text, 2), a, grid2)
        assert np.allclose(np.linalg.norm(H.normals, axis=1), 1.0)
        assert len(np.unique(H.vertices, axis=0)) == len(H.vertices)


def test_negative_definite_sequence(grid2):
    seq = build_sequence(make_scalar_field("-(x^2 + y^2)", 2), grid2, 4, 0.5)
    assert seq.levels == pytest.approx([-2.0, -1.0, -0.5, -0.25])
    assert {H.sign for H in seq} == {"+"}


@given(st.floats(0.2, 5.0))
@settings(max_examples=6, deadline=None)
def test_F_scaling_moves_levels_not_geometry(c):
    g = Grid.cube(2.0, 128, 2)
    F = make_scalar_field("x^2 + 4*y^2", 2)
    a = extract_level_component(F, 1.0, g)
    b = extract_level_component(F.scaled(c), c * 1.0, g)
    assert np.allclose(a.vertices, b.vertices, atol=1e-9)


# -- definiteness ---------------------------------------------------------------

def test_definiteness_kinds():
    assert local_definiteness_probe(make_scalar_field("x^2 + y^2", 2), 0.5).kind == "positive"
    assert local_definiteness_probe(make_scalar_field("-(x^2 + y^2)", 2), 0.5).kind == "negative"
    d = local_definiteness_probe(make_scalar_field("x^2 - y^2", 2), 0.5)
    assert d.kind == "indefinite"
    assert abs(d.positive_witness[0]) > abs(d.positive_witness[1])
    assert abs(d.negative_witness[1]) > abs(d.negative_witness[0])


def test_definiteness_degenerate_prone():
    # (xy)^2 vanishes on both axes; sampled values near the axes fall under 1e-12
    F = make_scalar_field("(x*y)^2", 2)
    kind = local_definiteness_probe(F, 0.5, 10000).kind
    assert kind in ("positive", "degenerate")
    xs = np.linspace(-0.5, 0.5, 101)
    X, Y = np.meshgrid(xs, xs)
    zeros = F.value(np.stack([X, Y], -1)) == 0
    assert zeros.sum() == 2 * 101 - 1


def test_definiteness_preconditions():
    F = make_scalar_field("x^2 + y^2", 2)
    with pytest.raises(ValueError):
        local_definiteness_probe(F, 0.5, 100)
    with pytest.raises(ValueError):
        local_definiteness_probe(F, -1.0)


# -- topology and reference meshes -------------------------------------------

@pytest.mark.parametrize("k", [0, 1, 2, 3])
def test_icosphere_signature(k):
    v, f = icosphere(k)
    assert topology_signature(Hypersurface.from_mesh(v, f)) == (1, 2)


def test_torus_signature():
    v, f = torus()
    H = Hypersurface.from_mesh(v, f)
    assert topology_signature(H) == (1, 0)
    assert not H.contains(np.zeros((1, 3)))[0]


def test_containment_of_sphere_mesh():
    v, f = icosphere(3)
    H = Hypersurface.from_mesh(v, f)
    pts = np.random.default_rng(1).uniform(-1.2, 1.2, size=(2000, 3))
    r = np.linalg.norm(pts, axis=1)
    sure = (r < 0.95) | (r > 1.0)
    assert np.array_equal(H.contains(pts[sure]), r[sure] < 0.95)


def test_diameter_heuristic_bound():
    pts = np.random.default_rng(5).normal(size=(6000, 3))
    approx = geo.diameter(pts)
    exact = geo.diameter(pts[:4000])
    assert approx >= exact * 0.5


def test_mesh_distance_matches_brute_force(unit_circle):
    H = unit_circle
    pts = np.random.default_rng(2).uniform(-1.5, 1.5, size=(300, 2))
    seg = H.vertices[H.facets]
    brute = np.array([geo.point_segment_distance(p, seg[:, 0], seg[:, 1]).min() for p in pts])
    assert np.allclose(H.distance(pts), brute, atol=1e-14)


def test_chord_error_is_sagitta_sized(unit_circle):
    H = unit_circle
    e = geo.max_edge_length(H.vertices, H.facets)
    vertex_gap = np.max(np.abs(np.linalg.norm(H.vertices, axis=1) - 1))
    assert 0 < H.chord_error <= e ** 2 / 8 + vertex_gap


# -- export -----------------------------------------------------------------------

def test_loop_csv_round_trip(unit_circle, tmp_path):
    write_loop_csv(unit_circle, tmp_path / "loop.csv")
    v = read_loop_csv(tmp_path / "loop.csv")
    assert np.array_equal(v, unit_circle.vertices)


def test_obj_round_trip(tmp_path):
    v, f = icosphere(2)
    H = Hypersurface.from_mesh(v, f)
    write_obj(H, tmp_path / "s.obj")
    v2, f2 = read_obj(tmp_path / "s.obj")
    assert np.array_equal(v2, H.vertices) and np.array_equal(f2, H.facets)


def test_export_dimension_checks(unit_circle, tmp_path):
    with pytest.raises(Unsupported):
        write_obj(unit_circle, tmp_path / "x.obj")


@given(st.floats(0.3, 3.0), st.floats(-0.4, 0.4))
@settings(max_examples=8, deadline=None)
def test_ellipse_sequences_are_nested(k, b):
    # positive definite quadratic forms x^2 + 2b xy + k y^2 (b^2 < k)
    F = make_scalar_field(f"x^2 + {2 * b!r}*x*y + {k!r}*y^2", 2)
    seq = build_sequence(F, Grid.cube(2.0, 96, 2), 5, 0.5)
    assert all(v == 1.0 for v in seq.certificates.values())
    assert np.all(np.diff([H.diameter for H in seq]) < 0)
