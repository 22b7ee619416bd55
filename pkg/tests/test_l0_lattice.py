import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from randcvx.l0_lattice import (
    RandomScalar,
    compare_events,
    ext_add,
    ext_mul,
    gen_inverse,
    glue,
    lattice_inf,
    lattice_sup,
    sign,
)
from randcvx.prob_core import Event

INF = math.inf


def ev(atoms, n=2):
    return Event(frozenset(atoms), n)


def test_glue_two_atoms():
    out = glue([ev({0}), ev({1})], [RandomScalar([5, 0]), RandomScalar([0, 7])])
    assert out.values.tolist() == [5.0, 7.0]


def test_glue_identity():
    xi = RandomScalar([1.5, -2])
    assert glue([ev({0, 1})], [xi]) == xi
    assert glue([ev({0}), ev({1})], [xi, xi]) == xi


def test_glue_rejects_bad_partitions():
    xi = RandomScalar([1, 2])
    with pytest.raises(ValueError, match="overlap"):
        glue([ev({0, 1}), ev({1})], [xi, xi])
    with pytest.raises(ValueError, match="cover"):
        glue([ev({0})], [xi])


def test_lattice_examples():
    assert lattice_sup([RandomScalar([1, 5]), RandomScalar([3, 2])]).values.tolist() == [3.0, 5.0]
    assert lattice_sup([RandomScalar([4, -1])]).values.tolist() == [4.0, -1.0]
    assert lattice_inf([RandomScalar([INF, 0]), RandomScalar([1, 0])]).values.tolist() == [1.0, 0.0]


def test_inverse_and_sign_examples():
    assert gen_inverse(RandomScalar([2, 0])).values.tolist() == [0.5, 0.0]
    assert sign(RandomScalar([-3, 0])).values.tolist() == [-1.0, 0.0]
    xi = RandomScalar([2, 0])
    assert (xi * gen_inverse(xi)).values.tolist() == [1.0, 0.0]


def test_inverse_overflow_is_reported():
    with pytest.raises(OverflowError):
        gen_inverse(RandomScalar([1e-320, 1.0]))


def test_inverse_needs_finite_values():
    with pytest.raises(ValueError):
        gen_inverse(RandomScalar([INF, 1]))


def test_compare_events_examples():
    lt, eq, gt = compare_events(RandomScalar([1, 5]), RandomScalar([2, 5]))
    assert (lt.sorted(), eq.sorted(), gt.sorted()) == ([0], [1], [])
    lt, eq, gt = compare_events(RandomScalar([3, 3]), RandomScalar([3, 3]))
    assert eq.is_omega
    lt, eq, gt = compare_events(RandomScalar([INF, 0]), RandomScalar([1, 0]))
    assert gt.sorted() == [0] and eq.sorted() == [1]


def test_extended_convention_table():
    vals = [-INF, -2.0, 0.0, 3.0, INF]
    for a in vals:
        for b in vals:
            s = float(ext_add(a, b))
            p = float(ext_mul(a, b))
            if INF in (a, b):
                assert s == INF
            elif -INF in (a, b):
                assert s == -INF
            else:
                assert s == a + b
            if a == 0 or b == 0:
                assert p == 0.0
            else:
                assert p == a * b


def test_scalar_arithmetic_uses_conventions():
    a = RandomScalar([INF, 0, -INF])
    b = RandomScalar([-INF, INF, 1])
    assert (a + b).values.tolist() == [INF, INF, -INF]
    assert (a * b).values.tolist() == [-INF, 0.0, -INF]


def test_nan_rejected():
    with pytest.raises(ValueError):
        RandomScalar([float("nan")])


def test_json_round_trip():
    xi = RandomScalar([INF, -INF, 0.25])
    assert RandomScalar.from_json(xi.to_json()) == xi
    assert xi.to_json() == ["inf", "-inf", 0.25]


ext = st.one_of(st.floats(-1e6, 1e6, allow_nan=False), st.sampled_from([INF, -INF, 0.0]))
fin = st.one_of(st.floats(-1e6, 1e6, allow_nan=False, allow_subnormal=False), st.just(0.0))
N = 4
family = st.lists(st.lists(ext, min_size=N, max_size=N), min_size=1, max_size=5)


@given(family)
def test_sup_is_least_upper_bound(fam):
    F = [RandomScalar(v) for v in fam]
    s = lattice_sup(F)
    for f in F:
        assert f.all_le(s)
    # minimality: on every atom some member attains the supremum
    stack = np.vstack([f.values for f in F])
    assert np.all(np.any(stack == s.values, axis=0))
    i = lattice_inf(F)
    assert np.all(np.any(stack == i.values, axis=0))
    for f in F:
        assert i.all_le(f)


@given(st.lists(ext, min_size=N, max_size=N), st.lists(ext, min_size=N, max_size=N), st.lists(st.booleans(), min_size=N, max_size=N))
def test_glue_is_local(a, b, mask):
    A = Event.from_mask(mask)
    out = glue([A, A.complement()], [RandomScalar(a), RandomScalar(b)])
    m = np.array(mask)
    assert np.array_equal(out.values[m], np.array(a)[m])
    assert np.array_equal(out.values[~m], np.array(b)[~m])


@given(ext)
def test_zero_times_anything(v):
    assert float(ext_mul(0.0, v)) == 0.0 and float(ext_mul(v, 0.0)) == 0.0


@given(st.lists(fin, min_size=N, max_size=N))
def test_sign_identities(v):
    xi = RandomScalar(v)
    s = sign(xi)
    assert np.array_equal(s.values * np.abs(xi.values), xi.values)
    assert np.array_equal(np.abs(s.values), (xi.values != 0).astype(float))
    prod = xi.values * gen_inverse(xi).values
    # 1/x is correctly rounded, so x * (1/x) lands within one ulp of 1
    assert np.all(np.abs(prod - (xi.values != 0)) <= np.spacing(1.0))


@given(st.lists(st.tuples(st.integers(-2000, 2000), st.integers(-30, 30)), min_size=N, max_size=N))
def test_inverse_identity_exact_on_powers_of_two(pairs):
    v = np.array([float(np.sign(m)) * 2.0**e for m, e in pairs])
    prod = v * gen_inverse(RandomScalar(v)).values
    assert np.array_equal(prod, (v != 0).astype(float))
