import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from randcvx import oracles
from randcvx.harness import random_seminorm_family, random_space
from randcvx.l0_lattice import RandomScalar
from randcvx.prob_core import Event, uniform_space
from randcvx.rlc_module import (
    Concatenated,
    CondPNorm,
    DominationError,
    FiniteSup,
    ModuleElement,
    ModuleFunctional,
    WeightedCoord,
    apply_functional,
    cond_p_norm,
    decompose_functional,
    eval_seminorm,
    glue_functionals,
    hull_cc_contains,
    hull_cc_functionals,
    hull_cc_representation,
    is_type_I,
    is_type_II,
    operator_bound,
    operator_bound_witnesses,
    seminorm_from_json,
    type_I_witness,
    type_II_witness,
)

INF = math.inf


def ev(atoms, n=2):
    return Event(frozenset(atoms), n)


def test_cond_p_norm_examples(space4):
    v = cond_p_norm([3, 4, 0, 0], 2, space4).values
    assert v[0] == pytest.approx(math.sqrt(12.5), rel=1e-15) and v[1] == 0.0
    assert cond_p_norm([1, -2, 5, 0], INF, space4).values.tolist() == [2.0, 5.0]


def test_cond_p_norm_rejects_small_p(space4):
    with pytest.raises(ValueError):
        cond_p_norm([1, 1, 1, 1], 0.5, space4)


def test_scalar_action_scales_norm(space4):
    x = ModuleElement([1, -2, 0.5, 3])
    for p in (1, 2, 3, INF):
        lhs = cond_p_norm(x.act([2, 3], space4), p, space4).values
        rhs = np.array([2, 3]) * cond_p_norm(x, p, space4).values
        assert np.allclose(lhs, rhs, rtol=1e-15)


def test_finite_sup_example(space4):
    s = FiniteSup((CondPNorm(1.0), CondPNorm(INF)))
    assert eval_seminorm(s, [1, 1, 2, 2], space4).values.tolist() == [1.0, 2.0]


def test_concatenated_is_local(space4):
    s = Concatenated((ev({0}), ev({1})), (CondPNorm(1.0), CondPNorm(INF)))
    x = [1, 3, -4, 2]
    v = eval_seminorm(s, x, space4).values
    assert v[0] == cond_p_norm(x, 1, space4).values[0]
    assert v[1] == cond_p_norm(x, INF, space4).values[1]


def test_seminorms_vanish_at_zero(space4):
    for s in (CondPNorm(2.0), WeightedCoord((1, 0, 2, 3)), FiniteSup((CondPNorm(1.0), CondPNorm(3.0)))):
        assert eval_seminorm(s, np.zeros(4), space4).values.tolist() == [0.0, 0.0]


def test_apply_functional_examples(space4):
    f = ModuleFunctional([1, 1, 0, 0])
    assert apply_functional(f, [3, 4, 9, 9], space4).values.tolist() == [7.0, 0.0]
    assert apply_functional(f, np.zeros(4), space4).values.tolist() == [0.0, 0.0]
    x = ModuleElement([1, 2, 3, 4])
    g = ModuleFunctional([0.5, -1, 2, 3])
    lhs = apply_functional(g, x.act([2, -1], space4), space4).values
    assert lhs.tolist() == (np.array([2, -1]) * apply_functional(g, x, space4).values).tolist()


def test_operator_bound_cond_one_norm(space4):
    # frozen from the sampled dual-norm oracle below
    assert operator_bound(ModuleFunctional([1, 1, 0, 0]), CondPNorm(1.0), space4).values.tolist() == [2.0, 0.0]


def test_operator_bound_matches_sampled_oracle(space4):
    c = np.array([1.0, 1.0])
    w = space4.conditional_weights(0)
    val, _ = oracles.dual_norm_sampled(c, lambda z: float(np.dot(w, np.abs(z))), n=4096)
    assert val == pytest.approx(2.0, rel=1e-6)


def test_operator_bound_zero_and_unbounded(space4):
    assert operator_bound(ModuleFunctional(np.zeros(4)), CondPNorm(2.0), space4).values.tolist() == [0.0, 0.0]
    v = operator_bound(ModuleFunctional([1, 0, 1, 0]), WeightedCoord((0, 1, 1, 1)), space4).values
    assert v[0] == INF and v[1] == 1.0


@pytest.mark.parametrize("p", [1.0, 1.5, 2.0, 3.0, INF])
def test_operator_bound_against_oracle(p):
    sp = uniform_space([3])
    rng = np.random.default_rng(7)
    for _ in range(3):
        c = rng.normal(size=3)
        got = operator_bound(ModuleFunctional(c), CondPNorm(p), sp).values[0]
        w = sp.conditional_weights(0)
        norm = (lambda z: float(np.max(np.abs(z)))) if p == INF else (lambda z: float(np.dot(w, np.abs(z) ** p) ** (1 / p)))
        ref, _ = oracles.dual_norm_sampled(c, norm, n=8192)
        assert ref <= got * (1 + 1e-9)
        assert ref >= got * (1 - 1e-4)


def test_operator_bound_polyhedral_composite():
    sp = uniform_space([2, 3])
    s = FiniteSup((WeightedCoord((1, 2, 0, 1, 3)), CondPNorm(1.0)))
    c = np.array([1.0, -2.0, 0.5, 1.0, 1.0])
    got = operator_bound(ModuleFunctional(c), s, sp).values
    for a in range(2):
        blk = sp.block(a)

        def norm(z, a=a):
            x = np.zeros(sp.dim)
            x[sp.block(a)] = z
            return s.evaluate(x, sp).values[a]

        ref, _ = oracles.dual_norm_sampled(c[blk], norm, n=8192)
        assert ref == pytest.approx(got[a], rel=1e-5)


def test_type_predicates_examples(space4):
    P = [CondPNorm(1.0)]
    f = ModuleFunctional([1, -2, 3, 0])
    assert is_type_I(f, P, space4) == bool(np.all(np.isfinite(operator_bound(f, P[0], space4).values)))
    z = ModuleFunctional(np.zeros(4))
    assert is_type_I(z, [WeightedCoord((0, 0, 0, 0))], space4) and is_type_II(z, [WeightedCoord((0, 0, 0, 0))], space4)
    killer = [WeightedCoord((0, 1, 1, 1))]
    g = ModuleFunctional([1, 0, 0, 0])
    assert operator_bound(g, killer[0], space4).values[0] == INF
    assert not is_type_I(g, killer, space4) and not is_type_II(g, killer, space4)


def test_type_II_uses_different_members_per_atom(space4):
    P = [WeightedCoord((1, 1, 0, 0)), WeightedCoord((0, 0, 1, 1))]
    f = ModuleFunctional([1, 1, 1, 1])
    w = type_II_witness(f, P, space4)
    assert isinstance(w, Concatenated) and len(w.events) == 2
    # on a finite space the full sup dominates whenever some concatenation does
    assert type_I_witness(f, P, space4) is not None


def test_decompose_single_block(space4):
    f = ModuleFunctional([1, 2, 3, 4])
    s = Concatenated((space4.omega(),), (CondPNorm(1.0),))
    xi = operator_bound(f, s, space4)
    parts = decompose_functional(f, s, xi, space4)
    assert len(parts) == 1 and parts[0] == f


def test_decompose_glued_functional(space4):
    fa, fb = ModuleFunctional([1, 2, 0, 0]), ModuleFunctional([0, 0, -3, 1])
    A = ev({0})
    f = glue_functionals([A, A.complement()], [fa, fb], space4)
    s = Concatenated((A, A.complement()), (CondPNorm(1.0), CondPNorm(INF)))
    parts = decompose_functional(f, s, operator_bound(f, s, space4), space4)
    assert parts[0] == fa and parts[1] == fb
    rng = np.random.default_rng(0)
    g = glue_functionals([A, A.complement()], parts, space4)
    for _ in range(100):
        x = rng.normal(size=4)
        assert np.array_equal(apply_functional(g, x, space4).values, apply_functional(f, x, space4).values)


def test_decompose_zero(space4):
    s = Concatenated((ev({0}), ev({1})), (CondPNorm(1.0), CondPNorm(2.0)))
    parts = decompose_functional(ModuleFunctional(np.zeros(4)), s, RandomScalar([0, 0]), space4)
    assert all(not np.any(p.coeffs) for p in parts)


def test_decompose_rejects_undominated(space4):
    s = Concatenated((space4.omega(),), (CondPNorm(1.0),))
    with pytest.raises(DominationError) as e:
        decompose_functional(ModuleFunctional([1, 1, 0, 0]), s, RandomScalar([1, 1]), space4)
    assert e.value.atom == 0 and e.value.witness is not None


def test_hull_cc_examples(space4):
    f, g = ModuleFunctional([1, 2, 3, 4]), ModuleFunctional([5, 6, 7, 8])
    assert [h.coeffs.tolist() for h in hull_cc_functionals([f], space4)] == [f.coeffs.tolist()]
    H = list(hull_cc_functionals([f, g], space4))
    assert len(H) == 4
    got = {tuple(h.coeffs) for h in H}
    assert got == {(1, 2, 3, 4), (5, 6, 7, 8), (1, 2, 7, 8), (5, 6, 3, 4)}
    for h in H:
        assert hull_cc_contains(h, [f, g], space4)
        events, members = hull_cc_representation(h, [f, g], space4)
        for e, m in zip(events, members):
            for a in e:
                assert np.array_equal(h.block(a, space4), m.block(a, space4))


def test_seminorm_json_round_trip(space4):
    s = Concatenated((ev({0}), ev({1})), (FiniteSup((CondPNorm(1.0), WeightedCoord((1, 2, 3, 4)))), CondPNorm(INF)))
    assert seminorm_from_json(s.to_json(), 2) == s


# property tests

@st.composite
def seminorm_case(draw):
    seed = draw(st.integers(0, 2**31))
    rng = np.random.default_rng(seed)
    sp = random_space(rng, 3, 3)
    kind = draw(st.sampled_from(["p1", "p2", "p3", "pinf", "weighted", "sup", "concat"]))
    if kind.startswith("p"):
        s = CondPNorm(INF if kind == "pinf" else float(kind[1]))
    elif kind == "weighted":
        s = WeightedCoord(tuple(rng.integers(0, 4, size=sp.dim).astype(float)))
    elif kind == "sup":
        s = FiniteSup((CondPNorm(2.0), WeightedCoord(tuple(rng.integers(0, 4, size=sp.dim).astype(float)))))
    else:
        A = Event.from_mask(rng.random(sp.n_atoms) < 0.5)
        evs = [e for e in (A, A.complement()) if not e.is_empty]
        s = Concatenated(tuple(evs), tuple([CondPNorm(1.0), CondPNorm(3.0)][: len(evs)]))
    x = rng.normal(size=sp.dim) * 10 ** rng.uniform(-2, 2)
    y = rng.normal(size=sp.dim) * 10 ** rng.uniform(-2, 2)
    xi = rng.normal(size=sp.n_atoms) * 5
    return sp, s, x, y, xi


@given(seminorm_case())
def test_seminorm_axioms(case):
    sp, s, x, y, xi = case
    nx, ny, nxy = (s.evaluate(v, sp).values for v in (x, y, x + y))
    assert np.all(nxy <= nx + ny + 1e-10 * (1 + nx + ny))
    nscaled = s.evaluate(sp.expand(xi) * x, sp).values
    assert np.allclose(nscaled, np.abs(xi) * nx, rtol=1e-12, atol=1e-300)
    assert np.all(nx >= 0) and np.all(np.isfinite(nx))


@given(st.integers(0, 2**31))
def test_operator_bound_is_minimal(seed):
    rng = np.random.default_rng(seed)
    sp = random_space(rng, 3, 3)
    s = random_seminorm_family(rng, sp, 2)[int(rng.integers(2))]
    f = ModuleFunctional(rng.normal(size=sp.dim))
    bound, wits = operator_bound_witnesses(f, s, sp)
    b = bound.values
    for _ in range(50):
        x = rng.normal(size=sp.dim)
        lhs = np.abs(apply_functional(f, x, sp).values)
        with np.errstate(invalid="ignore"):
            rhs = np.where(np.isfinite(b), b * s.evaluate(x, sp).values, INF)
        assert np.all(lhs <= rhs * (1 + 1e-9) + 1e-12)
    for a in range(sp.n_atoms):
        w = wits[a]
        if math.isfinite(b[a]) and b[a] > 0:
            nw = s.evaluate(w, sp).values[a]
            att = abs(apply_functional(f, w, sp).values[a])
            assert att >= (1 - 1e-6) * b[a] * nw
        elif b[a] == INF:
            # witness lies in the kernel yet f does not vanish on it
            assert s.evaluate(w, sp).values[a] == 0 and apply_functional(f, w, sp).values[a] != 0


@given(st.integers(0, 2**31))
def test_type_II_functionals_glue_from_type_I(seed):
    rng = np.random.default_rng(seed)
    sp = random_space(rng, 4, 3)
    P = random_seminorm_family(rng, sp)
    f = ModuleFunctional(rng.integers(-3, 4, size=sp.dim).astype(float))
    w = type_II_witness(f, P, sp)
    assert w is not None  # the family contains a norm
    parts = decompose_functional(f, w, operator_bound(f, w, sp), sp, n_samples=20)
    assert all(is_type_I(p, P, sp) for p in parts)
    assert hull_cc_representation(f, parts, sp) is not None
