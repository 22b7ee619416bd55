import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from randcvx import oracles
from randcvx.fenchel import (
    ConjugationError,
    Entropic,
    Grid,
    MaxAffine,
    MinusInf,
    PlusInf,
    PreconditionError,
    Quadratic,
    StratifiedConvexFunction,
    affine_minorant,
    biconjugate,
    classify_events,
    closure,
    conjugate,
    evaluate,
    fenchel_young_check,
    is_closed,
    is_l0_convex_check,
    is_local_check,
    is_proper,
    sample_domain_point,
    sup_closed,
    verify_witnesses,
)
from randcvx.harness import MIXED_KINDS, random_closed_function, random_max_affine, random_mixed_function, random_space
from randcvx.polyhedra import Polyhedron
from randcvx.prob_core import Event, uniform_space
from randcvx.rlc_module import ModuleFunctional, apply_functional

INF = math.inf


def interval(lo, hi):
    return Polyhedron.from_h([[1.0], [-1.0]], [hi, -lo], 1)


def absval():
    return MaxAffine([[1.0], [-1.0]], [0.0, 0.0], None, 1)


def single(piece):
    return StratifiedConvexFunction(uniform_space([piece.dim]), (piece,))


def test_evaluate_examples():
    assert evaluate(single(absval()), [3.0]).values.tolist() == [3.0]
    sp = uniform_space([2, 2])
    f = StratifiedConvexFunction(sp, (PlusInf(2), Entropic(1.0, sp.conditional_weights(1))))
    assert evaluate(f, [5, 5, 0, 0]).values.tolist() == [INF, 0.0]


def test_properness_examples():
    sp = uniform_space([1, 2])
    f = StratifiedConvexFunction(sp, (absval(), MaxAffine([[1.0, 2.0]], [0.0], Polyhedron.from_v([[0.0, 0.0], [1.0, 1.0]]), 2)))
    ok, w = is_proper(f)
    assert ok and np.all(np.isfinite(evaluate(f, w).values))
    g = StratifiedConvexFunction(sp, (MinusInf(1), f.pieces[1]))
    assert is_proper(g) == (False, None)


def test_glued_evaluation():
    sp = uniform_space([1, 1, 1])
    f = StratifiedConvexFunction(sp, (absval(), Quadratic([[2.0]]), MaxAffine([[1.0]], [0.0], interval(-1, 1), 1)))
    x, y = np.array([0.5, -2.0, 0.25]), np.array([-3.0, 1.0, 2.0])
    A = Event(frozenset({0, 2}), 3)
    sel = A.mask[sp.atom_of_fine]
    lhs = evaluate(f, np.where(sel, x, y)).values
    rhs = np.where(A.mask, evaluate(f, x).values, evaluate(f, y).values)
    assert np.array_equal(lhs, rhs)


def test_conjugate_of_half_square():
    c = Quadratic([[1.0]]).conjugate()
    for y in (-3.0, 0.0, 0.5, 2.0):
        assert c.evaluate([y]) == pytest.approx(y * y / 2, rel=1e-15)


def test_conjugate_needs_positive_definite():
    with pytest.raises(ConjugationError):
        Quadratic([[1.0, 0.0], [0.0, 0.0]]).conjugate()


def test_conjugate_of_interval_indicator():
    c = MaxAffine([[0.0]], [0.0], interval(-1, 1), 1).conjugate()
    for y in (-2.5, -1.0, 0.0, 0.3, 4.0):
        assert c.evaluate([y]) == abs(y)


def test_conjugate_of_abs_against_grid_oracle():
    c = absval().conjugate()
    xs = np.arange(-10000, 10001) / 1000.0
    ys = np.linspace(-3, 3, 61)
    ref = oracles.conjugate_on_grid(lambda x: abs(x), ys, xs)
    for y, r in zip(ys, ref):
        v = c.evaluate([y])
        if abs(y) <= 1:
            assert v == 0.0 and abs(r) <= 1e-6
        else:
            # the grid value grows with the grid radius, matching +inf in the limit
            assert v == INF and r >= 10 * (abs(y) - 1) - 1e-6


def test_biconjugate_of_max_affine(rng):
    for _ in range(5):
        p = random_max_affine(rng, 2)
        f = single(p)
        g = biconjugate(f)
        for _ in range(100):
            x = sample_domain_point(f, rng)
            assert evaluate(g, x).values[0] == pytest.approx(evaluate(f, x).values[0], abs=1e-9)


def test_biconjugate_repairs_grid_jump():
    xs = np.arange(-3.0, 4.0)
    vals = np.abs(xs)
    vals[4] = 5.0  # upward jump at x = 1
    f = single(Grid([xs], vals))
    assert not is_closed(f)
    g = biconjugate(f)
    probe = np.linspace(-3, 3, 25)
    ref = oracles.envelope_brute(xs, vals, probe)
    got = [evaluate(g, [t]).values[0] for t in probe]
    assert np.allclose(got, ref, atol=1e-12)
    assert evaluate(g, [1.0]).values[0] == 1.0


def test_biconjugate_of_plus_inf():
    f = single(PlusInf(1))
    assert isinstance(conjugate(f).pieces[0], MinusInf)
    assert isinstance(biconjugate(f).pieces[0], PlusInf)


def test_minorant_of_half_square(rng):
    f = single(Quadratic([[1.0]]))
    h = affine_minorant(f, [0.0], -1.0)
    sp = f.space
    assert h([0.0], sp).values[0] == -1.0
    for x in rng.normal(size=1000) * 5:
        assert h([x], sp).values[0] <= evaluate(f, [x]).values[0] + 1e-12


def test_minorant_of_point_indicator():
    f = single(MaxAffine([[0.0]], [0.0], Polyhedron.from_v([[0.0]]), 1))
    h = affine_minorant(f, [0.0], -1.0)
    assert h([0.0], f.space).values[0] == -1.0


def test_minorant_outside_domain_uses_tilt():
    sp = uniform_space([1, 1])
    f = StratifiedConvexFunction(sp, (MaxAffine([[1.0]], [0.0], interval(0, 1), 1), absval()))
    x0 = np.array([5.0, 2.0])
    beta = np.array([100.0, 1.0])
    h = affine_minorant(f, x0, beta)
    assert h.cases == (2, 1)
    assert np.array_equal(h(x0, sp).values, beta)
    for t in np.linspace(0, 1, 101):
        assert h([t, 0.0], sp).values[0] <= evaluate(f, [t, 0.0]).values[0] + 1e-12


def test_minorant_requires_beta_below_f():
    f = single(absval())
    with pytest.raises(PreconditionError):
        affine_minorant(f, [1.0], 2.0)


def test_classification_example():
    sp = uniform_space([1, 1, 1])
    f = StratifiedConvexFunction(sp, (MinusInf(1), PlusInf(1), Quadratic([[1.0]])))
    c = classify_events(f)
    assert (c.MI.sorted(), c.PI.sorted(), c.BP.sorted()) == ([0], [1], [2])
    assert verify_witnesses(f, c)


def test_proper_function_is_all_bp(rng):
    f = random_closed_function(rng, random_space(rng, 4, 3))
    c = classify_events(f)
    assert c.BP.is_omega and c.MI.is_empty and c.PI.is_empty and verify_witnesses(f, c)


def test_closure_examples(rng):
    f = random_closed_function(rng, random_space(rng, 3, 2))
    assert all(a is b for a, b in zip(closure(f).pieces, f.pieces))
    sp = uniform_space([2])
    g = StratifiedConvexFunction(sp, (Grid([[0.0, 1.0], [0.0, 1.0]], [[0.0, -INF], [1.0, 2.0]]),))
    assert isinstance(closure(g).pieces[0], MinusInf)
    xs = np.arange(5.0)
    h = single(Grid([xs], [0.0, 3.0, 1.0, 1.5, 4.0]))
    ch, bh = closure(h), biconjugate(h)
    for t in np.linspace(0, 4, 33):
        assert evaluate(ch, [t]).values[0] == pytest.approx(evaluate(bh, [t]).values[0], abs=1e-12)


def test_sup_of_max_affine_merges_pieces():
    sp = uniform_space([1])
    f = StratifiedConvexFunction(sp, (MaxAffine([[1.0]], [0.0], None, 1),))
    g = StratifiedConvexFunction(sp, (MaxAffine([[-1.0]], [0.0], None, 1),))
    s, rep = sup_closed([f, g])
    p = s.pieces[0]
    assert isinstance(p, MaxAffine) and p.n_pieces == 2 and rep.closed


def test_sup_minus_inf_identity():
    sp = uniform_space([1, 1])
    f = StratifiedConvexFunction(sp, (MinusInf(1), absval()))
    g = StratifiedConvexFunction(sp, (MinusInf(1), MinusInf(1)))
    s, rep = sup_closed([f, g])
    assert rep.mi_identity and classify_events(s).MI.sorted() == [0]


def test_sup_pi_identity_can_fail_on_disjoint_domains():
    sp = uniform_space([1])
    f = StratifiedConvexFunction(sp, (MaxAffine([[0.0]], [0.0], interval(0, 1), 1),))
    g = StratifiedConvexFunction(sp, (MaxAffine([[0.0]], [0.0], interval(2, 3), 1),))
    s, rep = sup_closed([f, g])
    assert classify_events(s).PI.sorted() == [0]
    assert rep.pi_contains_union and not rep.pi_identity


def test_sup_of_random_closed_functions(rng):
    sp = random_space(rng, 4, 2)
    fs = [random_closed_function(rng, sp) for _ in range(5)]
    s, rep = sup_closed(fs)
    assert rep.closed and is_closed(s) and rep.mi_identity and rep.pi_contains_union


def test_sup_rejects_non_closed():
    f = single(Grid([np.arange(3.0)], [0.0, 5.0, 0.0]))
    with pytest.raises(PreconditionError):
        sup_closed([f])


def test_json_round_trip(rng):
    sp = random_space(rng, 4, 2, min_atoms=3)
    f = random_mixed_function(rng, sp, [MIXED_KINDS[a] for a in range(sp.n_atoms)])
    g = StratifiedConvexFunction.from_json(f.to_json(), sp)
    for _ in range(20):
        x = rng.normal(size=sp.dim)
        assert np.array_equal(evaluate(f, x).values, evaluate(g, x).values)


# property tests


@given(st.integers(0, 2**31))
def test_fenchel_young(seed):
    rng = np.random.default_rng(seed)
    f = random_closed_function(rng, random_space(rng, 3, 3))
    assert fenchel_young_check(f, 30, seed).ok


@given(st.integers(0, 2**31))
def test_fenchel_young_equality_at_subgradients(seed):
    rng = np.random.default_rng(seed)
    sp = random_space(rng, 3, 3)
    f = random_closed_function(rng, sp)
    fc = conjugate(f)
    x = sample_domain_point(f, rng)
    g = np.zeros(sp.dim)
    for a, p in enumerate(f.pieces):
        z = x[sp.block(a)]
        g[sp.block(a)] = p.slopes[int(np.argmax(p.slopes @ z + p.intercepts))]
    lhs = evaluate(f, x).values + evaluate(fc, g).values
    rhs = apply_functional(ModuleFunctional(g), x, sp).values
    # an active piece is a subgradient where the domain constraint is slack
    inner = [a for a, p in enumerate(f.pieces) if p.dom is None or p.dom.interior_contains(x[sp.block(a)], 1e-6)]
    assert np.all(lhs >= rhs - 1e-9)
    assert np.allclose(lhs[inner], rhs[inner], atol=1e-9)


@given(st.integers(0, 2**31))
def test_conjugation_reverses_order(seed):
    rng = np.random.default_rng(seed)
    sp = random_space(rng, 3, 2)
    f = random_closed_function(rng, sp)
    # g = max(f, extra pieces) >= f on the same domains
    g_pieces = []
    for p in f.pieces:
        extra = random_max_affine(rng, p.dim)
        g_pieces.append(MaxAffine(np.vstack([p.slopes, extra.slopes]), np.r_[p.intercepts, extra.intercepts], p.dom, p.dim))
    g = StratifiedConvexFunction(sp, tuple(g_pieces))
    fc, gc = conjugate(f), conjugate(g)
    for _ in range(20):
        y = rng.normal(size=sp.dim) * 3
        assert np.all(evaluate(gc, y).values <= evaluate(fc, y).values + 1e-9)


@given(st.integers(0, 2**31))
def test_conjugate_of_glued_function_is_glued(seed):
    rng = np.random.default_rng(seed)
    sp = random_space(rng, 4, 2)
    f, g = random_closed_function(rng, sp), random_closed_function(rng, sp)
    A = Event.from_mask(rng.random(sp.n_atoms) < 0.5)
    h = StratifiedConvexFunction(sp, tuple(f.pieces[a] if a in A else g.pieces[a] for a in range(sp.n_atoms)))
    hc, fc, gc = conjugate(h), conjugate(f), conjugate(g)
    for _ in range(10):
        y = rng.normal(size=sp.dim) * 2
        expect = np.where(A.mask, evaluate(fc, y).values, evaluate(gc, y).values)
        assert np.array_equal(evaluate(hc, y).values, expect)


@given(st.integers(0, 2**31))
def test_closure_equals_biconjugate(seed):
    rng = np.random.default_rng(seed)
    sp = random_space(rng, 4, 2, min_atoms=3)
    f = random_mixed_function(rng, sp)
    c, b = closure(f), biconjugate(f)
    assert classify_events(c).same_events(classify_events(b))
    for _ in range(20):
        x = sample_domain_point(c, rng)
        u, v = evaluate(c, x).values, evaluate(b, x).values
        fin = np.isfinite(u)
        assert np.array_equal(u[~fin], v[~fin])
        assert np.allclose(u[fin], v[fin], atol=1e-8)


@given(st.integers(0, 2**31))
def test_structural_checks(seed):
    rng = np.random.default_rng(seed)
    f = random_closed_function(rng, random_space(rng, 3, 3))
    assert is_local_check(f, 20, seed).ok and is_l0_convex_check(f, 20, seed).ok
