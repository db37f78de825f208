import math

import numpy as np
import pytest

from gelfand import relations
from gelfand.core import CoeffVector, IndexSet
from gelfand.errors import EmptyVector, GelfandError, IndexSetMismatch, NotInvertible, SelectionExhausted
from gelfand.gram import random_spd_matrix
from gelfand.relations import DualPairing, LinearRelation


def _complex(rng, *shape):
    return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)


def test_pairing_is_linear_in_left_slot():
    M = random_spd_matrix(3, 5.0, np.random.default_rng(0))
    pair = DualPairing(M)
    y, x = np.array([1.0, 2j, 0.0]), np.array([0.5, 0.0, 1.0])
    assert pair.pairing(2j * y, x) == pytest.approx(2j * pair.pairing(y, x))
    assert pair.pairing(y, 2j * x) == pytest.approx(-2j * pair.pairing(y, x))
    assert DualPairing.canonical(3).pairing(y, x) == pytest.approx(np.vdot(x, y))


def test_singular_pairing_rejected():
    with pytest.raises(NotInvertible):
        DualPairing(np.array([[1.0, 1.0], [1.0, 1.0]]))
    with pytest.raises(IndexSetMismatch):
        DualPairing(np.ones((2, 3)))


def test_graph_contains_its_points():
    A = np.array([[1.0, 2.0], [0.0, 1j], [3.0, -1.0]])
    R = LinearRelation.graph(A)
    assert R.dims == (2, 3) and R.dim == 2
    x = np.array([1.0, -1.0])
    assert R.contains(x, A @ x)
    assert not R.contains(x, A @ x + 1.0)
    np.testing.assert_allclose(relations.relation_to_matrix(R), A, atol=1e-12)


def test_parts_of_a_multivalued_relation():
    # {(x, y) : x = 0}: ker is {0}, mul is everything, dom is {0}
    R = LinearRelation.span(2, 2, np.vstack([np.zeros((2, 2)), np.eye(2)]))
    parts = relations.relation_parts(R)
    assert parts.ker.shape[1] == 0
    assert parts.mul.shape[1] == 2
    assert parts.dom.shape[1] == 0
    assert parts.ran.shape[1] == 2
    with pytest.raises(GelfandError):
        relations.relation_to_matrix(R)


def test_canonical_adjoint_of_a_graph_is_conjugate_transpose():
    rng = np.random.default_rng(1)
    A = _complex(rng, 3, 2)
    adj = relations.adjoint_relation(LinearRelation.graph(A), DualPairing.canonical(2), DualPairing.canonical(3))
    assert adj.dims == (3, 2)
    np.testing.assert_allclose(relations.relation_to_matrix(adj), A.conj().T, atol=1e-12)


def test_adjoint_of_zero_relation_is_everything():
    R = LinearRelation.span(2, 3, np.zeros((5, 0)))
    adj = relations.adjoint_relation(R, DualPairing.canonical(2), DualPairing.canonical(3))
    assert adj.dim == 5


def test_adjoint_is_an_involution():
    rng = np.random.default_rng(2)
    R = LinearRelation.span(3, 2, _complex(rng, 5, 2))
    p1, p2 = DualPairing.canonical(3), DualPairing.canonical(2)
    back = relations.adjoint_relation(relations.adjoint_relation(R, p1, p2), p2, p1)
    assert relations.relations_equal(back, R, 1e-10)


def test_annihilator_under_weighted_pairing():
    M = random_spd_matrix(4, 10.0, np.random.default_rng(3))
    basis = np.eye(4, dtype=complex)[:, :1]
    ann = relations.annihilator(basis, DualPairing(M))
    assert ann.shape == (4, 3)
    for col in ann.T:
        assert abs(DualPairing(M).pairing(col, basis[:, 0])) < 1e-12


def test_subspace_distance():
    a = np.eye(3, dtype=complex)[:, :1]
    b = np.eye(3, dtype=complex)[:, 1:2]
    assert relations.subspace_distance(a, a) == pytest.approx(0.0, abs=1e-15)
    assert relations.subspace_distance(a, b) == pytest.approx(1.0)
    assert relations.subspace_distance(a, np.eye(3)[:, :2]) == 1.0
    with pytest.raises(IndexSetMismatch):
        relations.subspace_distance(a, np.eye(2)[:, :1])


def test_change_of_pairing_single_case():
    rng = np.random.default_rng(4)
    A = _complex(rng, 4, 3)
    psi1 = random_spd_matrix(3, 5.0, rng)
    psi2 = random_spd_matrix(4, 5.0, rng)
    result = relations.change_of_pairing_check(A, psi1, psi2)
    assert result["ok"], result
    assert result["tolerance"] == pytest.approx(result["kappa_psi1"] * result["kappa_psi2"] * 1e-12)
    with pytest.raises(IndexSetMismatch):
        relations.change_of_pairing_check(A, psi2, psi1)


def test_von_neumann_single_case():
    T = _complex(np.random.default_rng(5), 6, 4)
    result = relations.von_neumann_check(T)
    assert result["ok"]
    assert result["min_eig_star_t"] >= 1.0 - 1e-12
    assert result["min_eig_t_star"] >= 1.0 - 1e-12
    assert result["core"]


def test_appendix_checks_pass():
    assert relations.check_adjoint_identities(count=25, seed=0)["ok"]
    assert relations.check_change_of_pairing(count=25, seed=1)["ok"]
    assert relations.check_von_neumann(count=25, seed=2)["ok"]


def test_cesaro_on_orthonormal_basis():
    index_set = IndexSet.finite(100)
    basis = [CoeffVector.basis(index_set, i) for i in index_set.indices()]
    result = relations.cesaro_select(basis, 100)
    assert result.indices == tuple(range(100))
    assert result.cesaro_norm == pytest.approx(0.1, abs=1e-15)
    assert result.cesaro_norm ** 2 <= result.log_bound
    assert result.log_bound_holds
    assert result.cesaro_norm ** 2 <= result.bound


def test_cesaro_skips_correlated_vectors():
    index_set = IndexSet.finite(3)
    e1, e2, e3 = (CoeffVector.basis(index_set, i) for i in (1, 2, 3))
    seq = [e1, e1 * 0.9 + e2 * 0.1, e2, e3]
    result = relations.cesaro_select(seq, 3)
    assert result.indices == (0, 2, 3)


def test_cesaro_errors():
    index_set = IndexSet.finite(2)
    e1 = CoeffVector.basis(index_set, 1)
    with pytest.raises(SelectionExhausted) as info:
        relations.cesaro_select([e1, e1, e1], 2)
    assert info.value.partial == [0]
    with pytest.raises(EmptyVector):
        relations.cesaro_select([], 1)
    with pytest.raises(GelfandError):
        relations.cesaro_select([e1], 0)


def test_cesaro_report():
    report = relations.check_cesaro(seed=0)
    assert report["ok"]
    assert report["cesaro_norm"] == pytest.approx(0.1)
    assert report["log_bound"] == pytest.approx(1.0 / 100 + math.log(100) / 100)


def test_relation_json():
    R = LinearRelation.graph(np.array([[1.0, 1j]]))
    back = relations.relation_from_json(relations.relation_to_json(R))
    assert back.dims == R.dims
    assert relations.relations_equal(back, R, 1e-12)
