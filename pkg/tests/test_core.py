import math

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st

from gelfand.core import (
    CoeffVector,
    GridFunction,
    IndexSet,
    ResidualTracker,
    TolerancePolicy,
    merge_reports,
    pivot_inner,
    pivot_norm,
    random_vector,
    vec_axpy,
    vector_from_json,
    vector_to_json,
)
from gelfand.errors import GelfandError, IndexSetMismatch, ParseError

Z = IndexSet.symmetric()
F3 = IndexSet.finite(3)

coeffs = st.complex_numbers(max_magnitude=1e3, allow_nan=False, allow_infinity=False)
sparse = st.dictionaries(st.integers(-20, 20).filter(lambda i: i != 0), coeffs, max_size=6)


def test_index_sets():
    assert F3.contains(1) and F3.contains(3)
    assert not F3.contains(0) and not F3.contains(4)
    assert Z.contains(-5) and not Z.contains(0)
    assert F3.indices() == [1, 2, 3]
    assert IndexSet.from_label("finite:3") == F3
    assert IndexSet.from_label("symmetric") == Z
    with pytest.raises(ParseError):
        IndexSet.from_label("finite:x")
    with pytest.raises(GelfandError):
        Z.indices()
    with pytest.raises(GelfandError):
        IndexSet.finite(0)


def test_vector_is_normalized():
    v = CoeffVector(Z, ((3, 1.0), (-2, 0.0), (1, 2j)))
    assert v.support == (1, 3)
    assert v.get(-2) == 0
    assert v == CoeffVector.from_mapping(Z, {3: 1.0, 1: 2j})
    with pytest.raises(IndexSetMismatch):
        CoeffVector(Z, ((0, 1.0),))
    with pytest.raises(IndexSetMismatch):
        CoeffVector.basis(F3, 4)
    with pytest.raises(GelfandError):
        CoeffVector(Z, ((1, 1.0), (1, 2.0)))


def test_pivot_inner_is_linear_then_antilinear():
    f = CoeffVector.from_mapping(Z, {1: 1.0, 2: 1j})
    g = CoeffVector.from_mapping(Z, {2: 1.0, 5: 3.0})
    assert pivot_inner(f, g) == pytest.approx(1j)
    assert pivot_inner(f * 2j, g) == pytest.approx(2j * 1j)
    assert pivot_inner(f, g * 2j) == pytest.approx(-2j * 1j)
    assert pivot_inner(f, CoeffVector.zeros(Z)) == 0


def test_mixed_index_sets_rejected():
    with pytest.raises(IndexSetMismatch):
        pivot_inner(CoeffVector.basis(Z, 1), CoeffVector.basis(F3, 1))
    with pytest.raises(IndexSetMismatch):
        CoeffVector.basis(Z, 1) + CoeffVector.basis(F3, 1)


def test_axpy_prunes_cancellation():
    f = CoeffVector.from_mapping(Z, {1: 1.0, 2: 2.0})
    assert vec_axpy(-1.0, f, f).is_empty
    assert (f - CoeffVector.basis(Z, 1)).support == (2,)


@given(sparse, sparse)
@hyp_settings(max_examples=50, deadline=None)
def test_cauchy_schwarz(a, b):
    f, g = CoeffVector.from_mapping(Z, a), CoeffVector.from_mapping(Z, b)
    assert abs(pivot_inner(f, g)) <= pivot_norm(f) * pivot_norm(g) * (1 + 1e-12) + 1e-300
    assert pivot_inner(f, f).real == pytest.approx(pivot_norm(f) ** 2, rel=1e-12, abs=1e-300)


def test_dense_arrays():
    v = CoeffVector.from_array(F3, [1.0, 0.0, 2.0])
    assert v.support == (1, 3)
    np.testing.assert_allclose(v.to_array(), [1.0, 0.0, 2.0])
    with pytest.raises(IndexSetMismatch):
        CoeffVector.from_array(F3, [1.0, 2.0])
    with pytest.raises(GelfandError):
        CoeffVector.basis(Z, 1).to_array()


def test_random_vector_is_seeded():
    a = random_vector(Z, np.random.default_rng(7))
    b = random_vector(Z, np.random.default_rng(7))
    assert a == b
    assert 1 <= len(a)
    c = random_vector(F3, np.random.default_rng(1), support=[2])
    assert c.support == (2,)


def test_vector_json():
    v = CoeffVector.from_mapping(Z, {-3: 1 + 2j, 4: -0.5})
    assert vector_from_json(vector_to_json(v)) == v
    with pytest.raises(ParseError):
        vector_from_json({"entries": []})
    with pytest.raises(ParseError):
        vector_from_json({"index_set": "symmetric", "entries": [{"i": 1}, {"i": 1}]})
    with pytest.raises(ParseError):
        vector_from_json({"index_set": "finite:2", "entries": [{"i": 5, "re": 1.0}]})


def test_grid_function():
    g = GridFunction.uniform([1.0, 2.0, 3.0, 4.0])
    assert g.cell_weight == pytest.approx(0.25)
    np.testing.assert_allclose(g.midpoints(), [0.125, 0.375, 0.625, 0.875])
    with pytest.raises(GelfandError):
        GridFunction(3, np.ones(2), 1.0)


def test_tolerance_policy():
    tol = TolerancePolicy(1e-12, 1e-9, True)
    assert tol.scaled(100.0) == pytest.approx(1e-10)
    assert tol.scaled(0.5) == pytest.approx(1e-12)
    assert tol.scaled(math.inf) == pytest.approx(1e-12)
    assert TolerancePolicy(1e-12, 1e-9, False).scaled(100.0) == pytest.approx(1e-12)
    assert TolerancePolicy.from_json(tol.to_json()) == tol
    assert TolerancePolicy.from_json({"algebraic": 1e-10}).algebraic_tol == pytest.approx(1e-10)
    with pytest.raises(GelfandError):
        TolerancePolicy(1e-6, 1e-9)


def test_residual_tracker_keeps_worst_case():
    t = ResidualTracker("demo", 1e-3)
    t.update(1e-5, lambda: {"k": 0})
    t.update(1e-2, lambda: {"k": 1})
    t.update(1e-4, lambda: {"k": 2})
    report = t.report()
    assert not report["ok"]
    assert report["samples"] == 3
    assert report["counterexample"] == {"k": 1}

    ok = ResidualTracker("fine", 1.0)
    ok.update(0.5, lambda: {})
    merged = merge_reports("both", [ok.report(), report])
    assert not merged["ok"]
    assert merged["max_residual"] == pytest.approx(1e-2)
    assert merged["counterexample"]["check"] == "demo"


def test_merged_failure_reports_failing_tolerance():
    strict = ResidualTracker("strict", 1e-12)
    strict.update(1e-11, lambda: {"k": "strict"})
    loose = ResidualTracker("loose", 1e-9)
    loose.update(5e-10, lambda: {"k": "loose"})
    merged = merge_reports("mixed", [loose.report(), strict.report()])
    assert not merged["ok"]
    assert merged["max_residual"] == pytest.approx(1e-11)
    assert merged["tolerance"] == pytest.approx(1e-12)
    assert merged["max_residual"] > merged["tolerance"]
    assert merged["worst_check"] == "strict"
    assert merged["counterexample"] == {"k": "strict", "check": "strict"}


def test_merged_pass_reports_tightest_margin():
    a = ResidualTracker("a", 1e-12)
    a.update(5e-13, lambda: {})
    b = ResidualTracker("b", 1e-9)
    b.update(1e-10, lambda: {})
    merged = merge_reports("both", [b.report(), a.report()])
    assert merged["ok"]
    assert (merged["max_residual"], merged["tolerance"]) == (5e-13, 1e-12)
    assert "worst_check" not in merged


def test_merged_zero_tolerance_failure():
    exact = ResidualTracker("exact", 0.0)
    exact.update(1e-16, lambda: {})
    loose = ResidualTracker("loose", 1.0)
    loose.update(0.5, lambda: {})
    merged = merge_reports("z", [loose.report(), exact.report()])
    assert not merged["ok"]
    assert merged["tolerance"] == 0.0 and merged["max_residual"] > 0


def test_nan_residual_fails():
    t = ResidualTracker("nan", 1.0)
    t.update(float("nan"), lambda: {"bad": True})
    assert not t.ok
