import math

import numpy as np
import pytest

from gelfand import decomp
from gelfand.catalog import diagonal_triple, ell2_two_sided_triple, identity_triple, random_spd_triple
from gelfand.core import CoeffVector, pivot_norm, random_vector
from gelfand.errors import ComponentLeak, IndexSetMismatch, InvalidInterval
from gelfand.gram import CutSet, GramOperator
from gelfand.triple import QuasiTriple, minus_norm, plus_norm

DIAG = diagonal_triple([4.0, 1.0, 0.25], "diag-4-1-quarter").triple
ELL2 = ell2_two_sided_triple().triple
IDENT = identity_triple(3).triple
DENSE = random_spd_triple(6, 100.0, 0).triple


def test_identity_lands_on_bounded_side():
    split = decomp.decompose(IDENT, "0:1")
    assert split.component1.dimension == 0
    assert split.component2.dimension == 3
    assert split.component1.embedding_constant == 0.0


def test_diagonal_dimensions():
    split = decomp.decompose(DIAG, (0.0, 1.0))
    assert (split.component1.dimension, split.component2.dimension) == (1, 2)
    assert list(split.component1.basis) == [1]
    assert list(split.component2.basis) == [2, 3]
    assert split.component1.embedding_constant == pytest.approx(0.5)
    assert split.component2.embedding_constant == pytest.approx(1.0)
    assert split.component1.direction == decomp.PLUS_DOMINATES


def test_two_sided_descriptions():
    split = decomp.decompose(ELL2)
    assert split.component1.description == "n >= 2"
    assert split.component2.description == "n <= 1"
    assert split.component1.dimension is None and split.component2.dimension is None
    report = decomp.split_report(split)
    assert report["component1_dim"] == "infinite"
    assert report["cut"] == [[0.0, 1.0]]


def test_two_sided_wider_cut():
    split = decomp.decompose(ELL2, "0:2")
    assert split.component1.description == "n >= 3"
    assert split.lower_bound == 2.0 and split.upper_bound == 2.0


def test_dense_components_span_the_space():
    split = decomp.decompose(DENSE, CutSet.of((0.0, 3.0)))
    assert split.component1.dimension + split.component2.dimension == 6
    roots = np.sqrt(np.linalg.eigvalsh(DENSE.gram.matrix))
    assert split.component2.dimension == int(np.sum(roots <= 3.0))


def test_component_norm_bounds_at_unit_cut():
    split = decomp.decompose(DENSE, (0.0, 1.0))
    rng = np.random.default_rng(0)
    for _ in range(30):
        f = random_vector(DENSE.index_set, rng)
        f1 = split.proj_unbounded.apply(f)
        f2 = split.proj_bounded.apply(f)
        if not f1.is_empty:
            assert plus_norm(DENSE, f1) >= pivot_norm(f1) * (1 - 1e-9)
        assert plus_norm(DENSE, f2) <= pivot_norm(f2) * (1 + 1e-9)


def test_recompose():
    split = decomp.decompose(DIAG, (0.0, 1.0))
    f1 = CoeffVector.basis(DIAG.index_set, 1, 2.0)
    f2 = CoeffVector.from_mapping(DIAG.index_set, {2: 1.0, 3: -1.0})
    assert decomp.recompose(split, f1, f2) == f1 + f2
    with pytest.raises(ComponentLeak):
        decomp.recompose(split, f2, f2)


@pytest.mark.parametrize("cut", ["", "1:0", "1:inf"])
def test_bad_cuts(cut):
    with pytest.raises(InvalidInterval):
        decomp.decompose(DIAG, cut)


@pytest.mark.parametrize("T", [IDENT, DIAG, ELL2, DENSE], ids=["identity", "diag", "ell2", "dense"])
@pytest.mark.parametrize("cut", [(0.0, 1.0), (0.0, 2.0)])
def test_verify_decomposition_passes(T, cut):
    split = decomp.decompose(T, cut)
    report = decomp.verify_decomposition(split, T, samples=80, seed=1)
    assert report["ok"], report
    assert set(report["checks"]) == set(decomp.CHECK_NAMES)


def test_verification_is_independent_of_workers():
    split = decomp.decompose(DENSE, (0.0, 2.0))
    one = decomp.verify_decomposition(split, DENSE, samples=600, seed=9, workers=1)
    three = decomp.verify_decomposition(split, DENSE, samples=600, seed=9, workers=3)
    assert one["max_residual"] == three["max_residual"]
    assert one["checks"]["contraction"]["samples"] == 600


def test_verification_needs_matching_triple():
    split = decomp.decompose(DIAG, (0.0, 1.0))
    other = diagonal_triple([4.0, 1.0, 0.25]).triple
    with pytest.raises(IndexSetMismatch):
        decomp.verify_decomposition(split, other, samples=10)


def test_minus_norm_component_bound():
    split = decomp.decompose(ELL2, (0.0, 1.0))
    f = CoeffVector.from_mapping(ELL2.index_set, {-3: 1.0, 1: 1.0})
    part = split.proj_bounded.apply(f)
    assert part == f
    assert minus_norm(ELL2, part) >= pivot_norm(part) / split.upper_bound
    assert math.isfinite(split.component2.embedding_constant)


def _haar_unitary(n, rng):
    z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))


@pytest.mark.parametrize("seed", range(50))
def test_degenerate_eigenvalue_at_cut_stays_bounded(seed):
    q = _haar_unitary(3, np.random.default_rng(seed))
    T = QuasiTriple(GramOperator.dense((q * np.array([1.0, 1.0, 4.0])) @ q.conj().T))
    split = decomp.decompose(T, (0.0, 1.0))
    assert (split.component1.dimension, split.component2.dimension) == (1, 2)
    assert split.proj_bounded.rank == 2 and split.proj_unbounded.rank == 1
    assert split.component1.embedding_constant == pytest.approx(0.5)


@pytest.mark.parametrize("seed", range(10))
@pytest.mark.parametrize("cut", [(0.0, 1.0), (0.0, 2.0)])
def test_random_dense_decompositions_pass(seed, cut):
    T = random_spd_triple(2 + seed, 100.0, seed).triple
    split = decomp.decompose(T, cut)
    if cut == (0.0, 1.0):
        # the smallest eigenvalue is exactly 1
        assert split.component2.dimension == 1
    report = decomp.verify_decomposition(split, T, samples=200, seed=seed)
    assert report["ok"], report


def test_dense_dim8_seed11_wide_cut():
    T = random_spd_triple(8, 100.0, 11).triple
    report = decomp.verify_decomposition(decomp.decompose(T, (0.0, 2.0)), T, samples=1000, seed=11)
    assert report["ok"], report
    assert report["samples"] == 1000


def test_diagonal_thousand_samples():
    report = decomp.verify_decomposition(decomp.decompose(DIAG, (0.0, 1.0)), DIAG, samples=1000, seed=2)
    assert report["ok"]
    assert report["tolerance"] == pytest.approx(16e-12)
