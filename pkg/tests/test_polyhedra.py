import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from randcvx import oracles
from randcvx.harness import random_polytope_h, random_polytope_vertices
from randcvx.polyhedra import Polyhedron


def unit_box(d=2):
    return Polyhedron.from_h(np.vstack([np.eye(d), -np.eye(d)]), np.ones(2 * d), d)


def test_box_vertices():
    B = unit_box(2)
    got = sorted(map(tuple, B.points))
    assert got == [(-1.0, -1.0), (-1.0, 1.0), (1.0, -1.0), (1.0, 1.0)]
    assert B.is_bounded and not B.is_empty


def test_empty_and_whole():
    E = Polyhedron.from_h([[1.0], [-1.0]], [-1.0, -1.0], 1)
    assert E.is_empty
    W = Polyhedron.whole(2)
    assert W.contains([1e9, -1e9]) and not W.is_bounded


def test_cone_keeps_origin():
    C = Polyhedron.from_h([[-1.0, 0.0], [0.0, -1.0]], [0.0, 0.0], 2)
    assert np.array_equal(C.points, np.zeros((1, 2)))
    assert len(C.rays) == 2 and C.contains([3.0, 4.0])


def test_from_v_keeps_input_vertices():
    V = np.array([[0.1, 0.2], [1.3, 0.0], [0.0, 1.7], [0.3, 0.3]])
    P = Polyhedron.from_v(V)
    assert len(P.points) == 3
    for v in P.points:
        assert any(np.array_equal(v, w) for w in V)


def test_projection_and_distance():
    B = unit_box(2)
    assert np.allclose(B.project([2.0, 0.0]), [1.0, 0.0])
    assert B.distance([2.0, 0.0]) == pytest.approx(1.0)
    assert B.distance([0.5, 0.5]) == 0.0
    assert B.support([1.0, 1.0]) == 2.0


@given(st.integers(0, 2**31), st.integers(1, 3))
def test_h_to_v_matches_enumeration(seed, d):
    rng = np.random.default_rng(seed)
    A, b = random_polytope_h(rng, d)
    P = Polyhedron.from_h(A, b, d)
    ref = oracles.vertices_from_h(A, b)
    assert len(ref) == len(P.points)
    for v in P.points:
        assert np.min(np.linalg.norm(ref - v, axis=1)) < 1e-8


@given(st.integers(0, 2**31), st.integers(1, 3))
def test_membership_matches_lp(seed, d):
    rng = np.random.default_rng(seed)
    V = random_polytope_vertices(rng, d)
    P = Polyhedron.from_v(V)
    for _ in range(10):
        z = rng.normal(size=d) * 2
        dist = oracles.hull_distance_slsqp(V, z)
        if dist > 1e-6:
            assert not P.contains(z)
        elif oracles.in_hull_lp(V, z) and P.interior_contains(z, 1e-6):
            assert P.contains(z)
        assert P.distance(z) == pytest.approx(dist, abs=1e-6)


@given(st.integers(0, 2**31), st.integers(1, 3))
def test_support_matches_vertices(seed, d):
    rng = np.random.default_rng(seed)
    V = random_polytope_vertices(rng, d)
    P = Polyhedron.from_v(V)
    for _ in range(5):
        c = rng.normal(size=d)
        assert P.support(c) == pytest.approx(oracles.support_from_vertices(V, c), rel=1e-12, abs=1e-12)


@given(st.integers(0, 2**31), st.integers(1, 3))
def test_projection_is_optimal(seed, d):
    rng = np.random.default_rng(seed)
    A, b = random_polytope_h(rng, d)
    P = Polyhedron.from_h(A, b, d)
    z = rng.normal(size=d) * 4
    p = P.project(z)
    assert P.contains(p, 1e-9)
    # variational inequality: (z - p).(v - p) <= 0 for every vertex v
    assert np.all((P.points - p) @ (z - p) <= 1e-9 * (1 + np.linalg.norm(z)))
