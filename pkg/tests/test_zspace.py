import math

import numpy as np
import pytest

from gelfand import zspace
from gelfand.catalog import diagonal_triple, ell2_two_sided_triple, identity_triple, random_spd_triple
from gelfand.core import CoeffVector, pivot_norm, random_vector
from gelfand.errors import EmptyVector, GelfandError, IndexSetMismatch
from gelfand.triple import minus_norm, plus_norm

DIAG = diagonal_triple([4.0, 1.0, 0.25], "diag-4-1-quarter").triple
ELL2 = ell2_two_sided_triple().triple
IDENT = identity_triple(3).triple
DENSE = random_spd_triple(6, 100.0, 0).triple


def e(T, i):
    return CoeffVector.basis(T.index_set, i)


@pytest.mark.parametrize("T, i, zplus, zminus", [
    (IDENT, 1, math.sqrt(2.0), 1.0 / math.sqrt(2.0)),
    (DIAG, 1, math.sqrt(17.0) / 2.0, 2.0 / math.sqrt(17.0)),
    (ELL2, -2, math.sqrt(17.0) / 2.0, 2.0 / math.sqrt(17.0)),
], ids=["identity", "diag", "ell2"])
def test_unit_vector_norms(T, i, zplus, zminus):
    assert zspace.z_plus_norm(T, e(T, i)) == pytest.approx(zplus)
    assert zspace.z_minus_norm(T, e(T, i)) == pytest.approx(zminus)


def test_z_plus_inner_is_sum_of_forms():
    rng = np.random.default_rng(1)
    z = random_vector(DENSE.index_set, rng)
    assert zspace.z_plus_inner(DENSE, z, z).real == pytest.approx(zspace.z_plus_norm(DENSE, z) ** 2, rel=1e-12)
    assert zspace.z_plus_element(DENSE, z).z_plus_norm == pytest.approx(
        math.hypot(plus_norm(DENSE, z), minus_norm(DENSE, z)))


def test_canonical_split_diagonal():
    h = zspace.canonical_split(DIAG, e(DIAG, 1))
    assert h.plus_part.get(1) == pytest.approx(1.0 / 17.0)
    assert h.minus_part.get(1) == pytest.approx(16.0 / 17.0)
    pyth = math.hypot(plus_norm(DIAG, h.plus_part), minus_norm(DIAG, h.minus_part))
    assert pyth == pytest.approx(2.0 / math.sqrt(17.0))


def test_representation_independence():
    rng = np.random.default_rng(2)
    h = random_vector(ELL2.index_set, rng)
    f = random_vector(ELL2.index_set, rng, support=h.support)
    a = zspace.z_minus_norm(ELL2, zspace.ZMinusElement(f, h - f))
    b = zspace.z_minus_norm(ELL2, zspace.ZMinusElement.of_minus(h))
    assert a == pytest.approx(b, rel=1e-12)
    assert zspace.z_minus_equal(ELL2, zspace.ZMinusElement(f, h - f), zspace.ZMinusElement.of_plus(h))


def test_optimal_split_attains_closed_form():
    rng = np.random.default_rng(3)
    for T in (DIAG, ELL2, DENSE):
        f = random_vector(T.index_set, rng)
        g = random_vector(T.index_set, rng)
        z, value = zspace.optimal_split(T, f, g)
        closed = zspace.z_minus_norm(T, zspace.ZMinusElement(f, g))
        assert value == pytest.approx(closed, rel=1e-9)
        for _ in range(20):
            probe = z + random_vector(T.index_set, rng) * 0.01
            assert zspace.split_objective(T, f, g, probe) >= value * (1 - 1e-12)


def test_oracle_agrees_with_closed_form():
    h = CoeffVector.from_mapping(ELL2.index_set, {1: 1.0, -3: 2j, 4: -1.0})
    closed = zspace.z_minus_norm(ELL2, h)
    assert zspace.z_minus_norm_oracle(ELL2, h, trials=200, seed=0) == pytest.approx(closed, rel=1e-9)
    with pytest.raises(EmptyVector):
        zspace.z_minus_norm_oracle(ELL2, CoeffVector.zeros(ELL2.index_set))


def test_embedding_chain():
    rng = np.random.default_rng(4)
    for _ in range(50):
        h = random_vector(ELL2.index_set, rng)
        n0 = pivot_norm(h)
        assert zspace.z_minus_norm(ELL2, h) <= n0 * (1 + 1e-12)
        assert n0 <= zspace.z_plus_norm(ELL2, h) * (1 + 1e-12)


def test_intersection_witness():
    f = CoeffVector.from_mapping(ELL2.index_set, {2: 1.0, -1: 3.0})
    same = zspace.intersection_witness(ELL2, f, CoeffVector.from_mapping(ELL2.index_set, {-1: 3.0, 2: 1.0}))
    assert same.equal and same.space == "z_plus"
    assert same.norm == pytest.approx(zspace.z_plus_norm(ELL2, f))
    other = zspace.intersection_witness(ELL2, f, f + e(ELL2, 7))
    assert not other.equal and other.residual == pytest.approx(1.0)
    assert other.norm is None


def test_pivot_intersection_witness():
    x = e(ELL2, 3)
    plus = zspace.pivot_intersection_witness(ELL2, x, zspace.PLUS_SIDE)
    minus = zspace.pivot_intersection_witness(ELL2, x, zspace.MINUS_SIDE)
    assert plus.space == "d_plus" and plus.norm == pytest.approx(3.0)
    assert minus.space == "d_minus" and minus.norm == pytest.approx(1.0 / 3.0)
    with pytest.raises(GelfandError):
        zspace.pivot_intersection_witness(ELL2, x, "zero")


def test_parts_must_share_index_set():
    with pytest.raises(IndexSetMismatch):
        zspace.ZMinusElement(e(ELL2, 1), e(DIAG, 1))


def test_zminus_json():
    h = zspace.ZMinusElement(e(ELL2, 1) * 2.0, e(ELL2, -5) * 1j)
    assert zspace.zminus_from_json(zspace.zminus_to_json(h)) == h


@pytest.mark.parametrize("T", [IDENT, DIAG, ELL2, DENSE], ids=["identity", "diag", "ell2", "dense"])
def test_check_zspace_passes(T):
    report = zspace.check_zspace(T, samples=60, seed=0, oracle_vectors=2, trials=100)
    assert report["ok"], report
    assert set(report["checks"]) == {"pythagoras", "representation", "infimum", "embedding",
                                     "z_minus_oracle", "intersection"}
