import math

import numpy as np
import pytest
import scipy.linalg

from gelfand.core import CoeffVector, IndexSet, pivot_norm
from gelfand.errors import EigenResidualError, InvalidInterval, InvalidRange, NotInjective, NotSelfAdjoint, ParseError
from gelfand.gram import (
    DENSE,
    PAPER_ELL2,
    POWER,
    TABLE,
    CutSet,
    EigenDecomposition,
    GramOperator,
    Interval,
    WeightSpec,
    apply_function,
    dense_cut_mask,
    eigen_clusters,
    gram_apply,
    gram_from_json,
    gram_to_json,
    inverse_gram,
    inverse_square_sum,
    inverse_square_tail,
    inverse_square_tail_bound,
    random_spd_matrix,
    spectral_projection,
    validate_gram,
)

ELL2 = GramOperator.analytic(WeightSpec(PAPER_ELL2))


@pytest.mark.parametrize("i, w", [(1, 1.0), (2, 4.0), (3, 9.0), (-1, 1.0), (-2, 0.25), (-4, 1.0 / 16)])
def test_two_sided_weights(i, w):
    assert ELL2.weight.weight(i) == pytest.approx(w)
    assert ELL2.weight.power_of(i, 0.5) == pytest.approx(math.sqrt(w))


def test_gram_apply_powers():
    f = CoeffVector.from_mapping(IndexSet.symmetric(), {2: 1.0, -2: 1.0})
    half = gram_apply(ELL2, f, 0.5)
    assert half.get(2) == pytest.approx(2.0)
    assert half.get(-2) == pytest.approx(0.5)
    inv = gram_apply(ELL2, f, -1.0)
    assert inv.get(2) == pytest.approx(0.25)
    assert inv.get(-2) == pytest.approx(4.0)


def test_dense_functional_calculus_matches_matrix():
    rng = np.random.default_rng(3)
    a = random_spd_matrix(5, 50.0, rng)
    G = GramOperator.dense(a)
    x = CoeffVector.from_array(G.index_set, rng.standard_normal(5) + 1j * rng.standard_normal(5))
    via_eigen = apply_function(G, x, lambda lam: lam).to_array()
    np.testing.assert_allclose(via_eigen, a @ x.to_array(), rtol=1e-10, atol=1e-12)
    roundtrip = gram_apply(G, gram_apply(G, x, -1.0), 1.0)
    assert pivot_norm(roundtrip - x) / pivot_norm(x) < 1e-10


def test_random_spd_spectrum():
    a = random_spd_matrix(6, 100.0, np.random.default_rng(0))
    lam = np.linalg.eigvalsh(a)
    assert lam[0] == pytest.approx(1.0, rel=1e-10)
    assert lam[-1] == pytest.approx(100.0, rel=1e-10)
    np.testing.assert_allclose(a, a.conj().T)


def test_condition_numbers():
    assert GramOperator.finite_diagonal([4.0, 1.0, 0.25]).condition_number() == pytest.approx(16.0)
    assert GramOperator.identity(3).condition_number() == pytest.approx(1.0)
    assert math.isinf(ELL2.condition_number())
    table = GramOperator.analytic(WeightSpec(TABLE, table=((1, 4.0), (-1, 0.5)), default_weight=1.0))
    assert table.condition_number() == pytest.approx(8.0)


def test_inverse_gram():
    G = GramOperator.finite_diagonal([4.0, 1.0, 0.25])
    np.testing.assert_allclose(inverse_gram(G).lambdas, [0.25, 1.0, 4.0])
    inv = inverse_gram(ELL2)
    assert inv.weight.kind == POWER
    for i in (-3, -1, 1, 5):
        assert inv.weight.weight(i) == pytest.approx(1.0 / ELL2.weight.weight(i))


def test_validation_gate():
    assert validate_gram(GramOperator.identity(2))["ok"]
    with pytest.raises(NotInjective):
        validate_gram(GramOperator.finite_diagonal([1.0, 0.0]))
    with pytest.raises(NotInjective):
        validate_gram(GramOperator.finite_diagonal([1.0, -1.0]))
    bad = np.array([[2.0, 1.0], [0.0, 2.0]], dtype=complex)
    with pytest.raises(NotSelfAdjoint):
        validate_gram(GramOperator.dense(bad))


def test_intervals_and_cuts():
    assert Interval(0.0, 1.0).contains(1.0)
    assert not Interval(0.0, 1.0).contains(0.0)
    with pytest.raises(InvalidInterval):
        Interval(1.0, 1.0)
    with pytest.raises(InvalidInterval):
        Interval(-1.0, 1.0)
    cut = CutSet.parse("2:3, 0:1, 0.5:1.5")
    assert cut.to_json() == [[0.0, 1.5], [2.0, 3.0]]
    comp = cut.complement()
    assert comp.to_json() == [[1.5, 2.0], [3.0, None]]
    assert CutSet.from_json(comp.to_json()).to_json() == comp.to_json()
    with pytest.raises(InvalidInterval):
        CutSet.parse("0-1")


def test_spectral_projection_diagonal():
    G = GramOperator.finite_diagonal([4.0, 1.0, 0.25])
    P = spectral_projection(G, (0.0, 1.0))
    assert P.rank == 2
    x = CoeffVector.from_array(G.index_set, [1.0, 2.0, 3.0])
    assert P.apply(x).support == (2, 3)


def test_spectral_projection_dense_is_orthogonal():
    G = GramOperator.dense(random_spd_matrix(6, 100.0, np.random.default_rng(2)))
    P = spectral_projection(G, (0.0, 5.0)).matrix()
    Q = spectral_projection(G, CutSet.of((0.0, 5.0)).complement()).matrix()
    np.testing.assert_allclose(P @ P, P, atol=1e-12)
    np.testing.assert_allclose(P + Q, np.eye(6), atol=1e-12)


def test_inverse_square_sums():
    assert inverse_square_sum(1, 3) == pytest.approx(49.0 / 36.0, rel=1e-15)
    assert inverse_square_tail(1) == pytest.approx(math.pi ** 2 / 6, rel=1e-12)
    assert inverse_square_tail(10) <= inverse_square_tail_bound(10)
    assert math.isinf(inverse_square_tail_bound(1))
    with pytest.raises(InvalidRange):
        inverse_square_sum(3, 1)


def test_gram_json():
    G = GramOperator.finite_diagonal([4.0, 1.0, 0.25])
    assert np.allclose(gram_from_json(gram_to_json(G)).lambdas, G.lambdas)
    assert gram_from_json(gram_to_json(ELL2)).weight == ELL2.weight
    with pytest.raises(ParseError):
        gram_from_json({"kind": "sparse"})
    with pytest.raises(ParseError):
        gram_from_json({"kind": "finite_diagonal"})


def test_eigenvectors_are_unitary():
    G = GramOperator.dense(random_spd_matrix(12, 1e4, np.random.default_rng(4)))
    assert G.eigen.unitarity_residual() <= 1e-12


def test_non_unitary_eigenvectors_rejected(monkeypatch):
    real_eigh = scipy.linalg.eigh

    def stretched(a):
        lam, vec = real_eigh(a)
        return lam, 2.0 * vec

    monkeypatch.setattr(scipy.linalg, "eigh", stretched)
    with pytest.raises(EigenResidualError, match="unitary"):
        GramOperator.dense(np.diag([1.0, 2.0, 3.0]))


def test_eigen_clusters():
    lam = np.array([0.5, 1.0 - 2e-16, 1.0 + 4e-16, 4.0])
    assert eigen_clusters(lam, 1e-12) == [(0, 1), (1, 3), (3, 4)]
    assert eigen_clusters(np.array([]), 1e-12) == []


def test_cut_endpoint_cluster_goes_to_bounded_side():
    lam = np.array([1.0 - 2e-16, 1.0 + 4e-16, 4.0])
    G = GramOperator(DENSE, IndexSet.finite(3), matrix=np.diag(lam).astype(complex),
                     eigen=EigenDecomposition(lam, np.eye(3, dtype=complex)))
    assert math.sqrt(G.eigen.eigenvalues[1]) > 1.0
    cut = CutSet.of((0.0, 1.0))
    assert list(dense_cut_mask(G, cut)) == [True, True, False]
    assert list(dense_cut_mask(G, cut.complement())) == [False, False, True]
    assert spectral_projection(G, cut).rank == 2
