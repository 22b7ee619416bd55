import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from randcvx.fenchel import conjugate, evaluate
from randcvx.harness import random_space
from randcvx.prob_core import make_space, uniform_space
from randcvx.risk import (
    EntropicRiskSpec,
    axioms_report,
    entropic_risk,
    risk_at,
    risk_duality_report,
    worst_case_limit_report,
)


def test_zero_position_has_zero_risk(uniform22):
    spec = EntropicRiskSpec(1.0, uniform22)
    assert risk_at(spec, np.zeros(4)).values.tolist() == [0.0, 0.0]


def test_two_point_value():
    spec = EntropicRiskSpec(1.0, uniform_space([2]))
    expect = math.log((1 + math.exp(-1)) / 2)
    assert risk_at(spec, [0.0, 1.0]).values[0] == pytest.approx(expect, rel=1e-15)


def test_cash_invariance_example(uniform22):
    spec = EntropicRiskSpec(2.0, uniform22)
    m = np.array([1.5, -0.75])
    x = np.array([0.3, -1.0, 2.0, 0.5])
    lhs = risk_at(spec, x + uniform22.expand(m)).values
    assert np.allclose(lhs, risk_at(spec, x).values - m, atol=1e-14)


def test_one_point_atoms_are_exact():
    sp = uniform_space([1, 1, 1])
    spec = EntropicRiskSpec(3.0, sp)
    x = np.array([1.25, -7.0, 0.1])
    assert risk_at(spec, x).values.tolist() == (-x).tolist()


@pytest.mark.parametrize("gamma", [0.0, -1.0, math.inf, math.nan])
def test_gamma_must_be_positive(uniform22, gamma):
    with pytest.raises(ValueError):
        EntropicRiskSpec(gamma, uniform22)


def test_penalty_is_relative_entropy():
    sp = make_space([0.25, 0.75], [[0], [1]], [[0, 1]])
    pen = conjugate(entropic_risk(EntropicRiskSpec(2.0, sp)))
    q = np.array([0.5, 0.5])
    expect = (0.5 * math.log(2) + 0.5 * math.log(0.5 / 0.75)) / 2.0
    assert evaluate(pen, -q).values[0] == pytest.approx(expect, rel=1e-14)
    assert evaluate(pen, [0.5, 0.5]).values[0] == math.inf


def test_duality_report(uniform22):
    rep = risk_duality_report(EntropicRiskSpec(1.0, uniform22), n_samples=50)
    assert rep["ok"] and rep["max_gap"] <= 1e-6
    assert all(math.isfinite(p["penalty"][0]) for p in rep["penalties"])


def test_worst_case_limit():
    sp = uniform_space([2, 2])
    rep = worst_case_limit_report(EntropicRiskSpec(100.0, sp))
    assert rep["ok"] and rep["max_gap"] <= 1e-2 and rep["max_gap"] <= rep["bound"] + 1e-15


def test_axioms_report(uniform22):
    rep = axioms_report(EntropicRiskSpec(0.5, uniform22), n=50)
    assert rep["ok"] and rep["proper"]


@given(st.integers(0, 2**31), st.floats(0.05, 20.0))
def test_risk_between_mean_loss_and_worst_case(seed, gamma):
    rng = np.random.default_rng(seed)
    sp = random_space(rng, 3, 3)
    x = rng.normal(size=sp.dim) * 3
    r = risk_at(EntropicRiskSpec(gamma, sp), x).values
    for a in range(sp.n_atoms):
        z = x[sp.block(a)]
        mean = float(sp.conditional_weights(a) @ z)
        assert -mean - 1e-12 <= r[a] <= float(np.max(-z)) + 1e-12


@given(st.integers(0, 2**31))
def test_monotone_and_cash_invariant(seed):
    rng = np.random.default_rng(seed)
    sp = random_space(rng, 3, 3)
    spec = EntropicRiskSpec(float(rng.uniform(0.1, 5)), sp)
    x = rng.normal(size=sp.dim)
    y = x + rng.exponential(size=sp.dim)
    m = rng.normal(size=sp.n_atoms)
    rx, ry = risk_at(spec, x).values, risk_at(spec, y).values
    assert np.all(ry <= rx + 1e-12)
    assert np.allclose(risk_at(spec, x + sp.expand(m)).values, rx - m, atol=1e-12)
