"""One test per acceptance criterion, at full scale and the stated tolerances.

Each test prints a single PASS/FAIL line; the lines are repeated in the
terminal summary under "acceptance criteria".
"""

import time

import pytest

from randcvx.harness import ExperimentConfig, run_suite

SEED = 20240611


def _run(suite, **kw):
    t = time.perf_counter()
    rep = run_suite(ExperimentConfig(suite=suite, seed=SEED, **kw))["suites"][suite]
    return rep, time.perf_counter() - t


def _line(rep, elapsed):
    return f"{rep['n_passed']}/{rep['n_instances']} passed, worst gap {rep['worst_gap']:.3g}, {elapsed:.1f}s"


@pytest.mark.acceptance
def test_criterion_01_biconjugate_equals_closed_function(record_acceptance):
    rep, elapsed = _run("duality")
    ok = rep["ok"] and rep["n_instances"] == 200 and rep["worst_gap"] <= 1e-8 and elapsed <= 60.0
    assert record_acceptance("1 biconjugate of closed MaxAffine functions", ok, _line(rep, elapsed))


@pytest.mark.acceptance
def test_criterion_02_biconjugate_equals_closure(record_acceptance):
    rep, elapsed = _run("closure")
    inst = rep["instances"].values()
    ok = rep["ok"] and rep["n_instances"] == 100 and rep["worst_gap"] <= 1e-8
    ok &= all(r["same_events"] and r["infinite_atoms_exact"] for r in inst)
    assert record_acceptance("2 biconjugate equals closure on mixed MI/PI/BP", ok, _line(rep, elapsed))


@pytest.mark.acceptance
def test_criterion_03_stratified_separation(record_acceptance):
    rep, elapsed = _run("separation")
    ok = rep["ok"] and rep["n_instances"] == 200
    ok &= all(r["strict_event"] == r["oracle_event"] for r in rep["instances"].values())
    assert record_acceptance("3 stratified separation vs LP and vertex oracles", ok, _line(rep, elapsed))


@pytest.mark.acceptance
def test_criterion_04_strict_separation_normalized(record_acceptance):
    rep, elapsed = _run("strict")
    inst = rep["instances"].values()
    ok = rep["ok"] and all(r["strict_everywhere"] and r["sup_abs_le_1"] and r["atoms_above_1"] >= 1 for r in inst)
    assert record_acceptance("4 strict separation with exact normalization", ok, _line(rep, elapsed))


@pytest.mark.acceptance
def test_criterion_05_gauge_sandwich(record_acceptance):
    rep, elapsed = _run("gauge")
    inst = list(rep["instances"].values())
    ok = rep["ok"] and rep["n_instances"] == 100 and sum(r["violations"] for r in inst) == 0
    detail = f"{_line(rep, elapsed)}, {sum(r['interior'] for r in inst)} interior points"
    assert record_acceptance("5 gauge sandwich on balanced bodies", ok, detail)


@pytest.mark.acceptance
def test_criterion_06_decomposition_and_gluing(record_acceptance):
    rep, elapsed = _run("decomposition")
    inst = rep["instances"].values()
    ok = rep["ok"] and rep["n_instances"] == 100 and rep["worst_gap"] <= 1e-9
    ok &= all(r["glue_exact"] and r["parts_type_I"] and r["glued_from_type_I"] for r in inst)
    assert record_acceptance("6 decomposition of dominated functionals", ok, _line(rep, elapsed))


@pytest.mark.acceptance
def test_criterion_07_counterexample_probe(record_acceptance):
    rep, elapsed = _run("counterexample")
    sizes = {r["n"] for r in rep["instances"].values()}
    ok = rep["ok"] and rep["n_instances"] == 300 and sizes == {4, 16, 64}
    assert record_acceptance("7 non-closed set probe on 4, 16, 64 atoms", ok, _line(rep, elapsed))


@pytest.mark.acceptance
def test_criterion_08_lattice_and_seminorm_axioms(record_acceptance):
    rep, elapsed = _run("axioms")
    r = rep["instances"]["0"]
    ok = rep["ok"] and r["rounds"] == 10000 and not r["violations"]
    assert record_acceptance("8 seminorm and lattice axioms", ok, f"{r['rounds']} rounds, violations {r['violations']}, {elapsed:.1f}s")


@pytest.mark.acceptance
def test_criterion_09_legendre_transform(record_acceptance):
    rep, elapsed = _run("legendre")
    ok = rep["ok"] and rep["n_instances"] == 50 and all(r["mismatches"] == 0 for r in rep["instances"].values())
    assert record_acceptance("9 discrete Legendre transform vs brute force", ok, _line(rep, elapsed))


@pytest.mark.acceptance
def test_criterion_10_entropic_risk(record_acceptance):
    rep, elapsed = _run("risk")
    ok = rep["ok"] and rep["worst_gap"] <= 1e-6
    for r in rep["instances"].values():
        ax = r["axioms"]
        ok &= ax["proper"] and all(ax[k]["ok"] for k in ("locality", "l0_convexity", "monotonicity", "cash_invariance"))
    assert record_acceptance("10 entropic risk axioms and duality", ok, _line(rep, elapsed))
