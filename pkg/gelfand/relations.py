# gelfand/relations.py
"""
Finite-dimensional linear relations and dual-pair adjoints.

Responsibilities:
- DualPairing: sesquilinear pairing <y, x> = x^H M y with invertible M
- LinearRelation: subspace of X1 x X2 stored as an orthonormal basis of (x; y) columns
- relation_parts (ker, ran, mul, dom), adjoint_relation, annihilator
- subspace distances through principal angles
- change-of-pairing and von Neumann checks, greedy Cesaro selection

In finite dimensions every relation is closed and every operator bounded, so
closure and closability are identities here and nothing simulates topology.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.linalg

from config import settings
from gelfand.core import (
    CoeffVector,
    IndexSet,
    ResidualTracker,
    complex_gaussian,
    merge_reports,
    pivot_inner,
    pivot_norm,
    random_vector,
)
from gelfand.errors import EmptyVector, GelfandError, IndexSetMismatch, NotInvertible, ParseError, SelectionExhausted
from gelfand.gram import random_spd_matrix

logger = logging.getLogger("relations")
logger.setLevel(logging.INFO)


# -------------------------
# Subspace helpers
# -------------------------
def _orth(a: np.ndarray) -> np.ndarray:
    """
    Orthonormal basis of ran a; n x 0 when a has no range. The rank cutoff has
    an absolute floor, so rounding noise in a zero block never counts as range.
    """
    a = np.asarray(a, dtype=complex)
    if a.shape[1] == 0 or not np.any(a):
        return np.zeros((a.shape[0], 0), dtype=complex)
    u, s, _ = scipy.linalg.svd(a, full_matrices=False)
    cutoff = max(a.shape) * np.finfo(float).eps * max(1.0, float(s[0]))
    return u[:, s > cutoff]


def _null(a: np.ndarray) -> np.ndarray:
    """Orthonormal basis of ker a."""
    a = np.asarray(a, dtype=complex)
    if a.shape[1] == 0:
        return np.zeros((0, 0), dtype=complex)
    if a.shape[0] == 0 or not np.any(a):
        return np.eye(a.shape[1], dtype=complex)
    _, s, vh = scipy.linalg.svd(a, full_matrices=True)
    cutoff = max(a.shape) * np.finfo(float).eps * max(1.0, float(s[0]))
    rank = int(np.sum(s > cutoff))
    return vh[rank:].conj().T


def _random_matrix(rng: np.random.Generator, rows: int, cols: int) -> np.ndarray:
    return complex_gaussian(rng, rows * cols).reshape(rows, cols)


def subspace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """
    sin of the largest principal angle between ran a and ran b (orthonormal
    columns). Subspaces of different dimension are at distance 1.
    """
    if a.shape[0] != b.shape[0]:
        raise IndexSetMismatch(f"subspaces of C^{a.shape[0]} and C^{b.shape[0]}")
    if a.shape[1] != b.shape[1]:
        return 1.0
    if a.shape[1] == 0:
        return 0.0
    return float(np.sin(np.max(scipy.linalg.subspace_angles(a, b))))


# -------------------------
# Types
# -------------------------
@dataclass(frozen=True, eq=False)
class DualPairing:
    """
    Complete dual pair between Y (left slot) and X (right slot):
    pairing(y, x) = x^H M y, linear in y and antilinear in x.
    """
    matrix: np.ndarray

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise IndexSetMismatch(f"a complete dual pair needs a square matrix, got shape {m.shape}")
        if np.linalg.cond(m) > 1.0 / np.finfo(float).eps:
            raise NotInvertible("pairing matrix is singular: the pair is not complete")
        object.__setattr__(self, "matrix", m)

    @classmethod
    def canonical(cls, n: int) -> "DualPairing":
        return cls(np.eye(n, dtype=complex))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def pairing(self, y: np.ndarray, x: np.ndarray) -> complex:
        return complex(np.vdot(x, self.matrix @ y))


@dataclass(frozen=True, eq=False)
class LinearRelation:
    """Subspace of X1 x X2; `basis` columns are orthonormal, stacked as (x; y)."""
    dims: Tuple[int, int]
    basis: np.ndarray = field(repr=False)

    def __post_init__(self):
        n1, n2 = self.dims
        b = np.asarray(self.basis, dtype=complex)
        if b.ndim != 2 or b.shape[0] != n1 + n2:
            raise IndexSetMismatch(f"basis of shape {b.shape} does not fit C^{n1} x C^{n2}")
        object.__setattr__(self, "dims", (int(n1), int(n2)))
        object.__setattr__(self, "basis", _orth(b))

    @classmethod
    def span(cls, n1: int, n2: int, columns) -> "LinearRelation":
        return cls((n1, n2), np.asarray(columns, dtype=complex).reshape(n1 + n2, -1))

    @classmethod
    def graph(cls, matrix) -> "LinearRelation":
        """{(x, A x)} for an n2 x n1 matrix A."""
        a = np.atleast_2d(np.asarray(matrix, dtype=complex))
        n2, n1 = a.shape
        return cls((n1, n2), np.vstack([np.eye(n1, dtype=complex), a]))

    @property
    def dim(self) -> int:
        return self.basis.shape[1]

    @property
    def top(self) -> np.ndarray:
        return self.basis[: self.dims[0]]

    @property
    def bottom(self) -> np.ndarray:
        return self.basis[self.dims[0]:]

    def contains(self, x, y, tol: Optional[float] = None) -> bool:
        tol = getattr(settings, "ALGEBRAIC_TOL", 1e-12) if tol is None else tol
        v = np.concatenate([np.asarray(x, dtype=complex), np.asarray(y, dtype=complex)])
        scale = max(float(np.linalg.norm(v)), 1.0)
        residual = v - self.basis @ (self.basis.conj().T @ v)
        return float(np.linalg.norm(residual)) <= tol * scale


@dataclass(frozen=True, eq=False)
class RelationParts:
    ker: np.ndarray
    ran: np.ndarray
    mul: np.ndarray
    dom: np.ndarray


@dataclass(frozen=True)
class CesaroResult:
    """
    indices: positions in the input sequence (0-based), in selection order.
    bound: C^2/N + 2(N - H_N)/N^2, guaranteed by the selection rule.
    log_bound: C^2/N + ln(N)/N; log_bound_holds says whether it held here.
    """
    indices: Tuple[int, ...]
    cesaro_norm: float
    max_norm: float
    bound: float
    log_bound: float
    log_bound_holds: bool


# -------------------------
# Relation algebra
# -------------------------
def relation_parts(R: LinearRelation) -> RelationParts:
    """
    ker = {x : (x, 0) in R}, mul = {y : (0, y) in R}, dom and ran are the
    coordinate projections; all returned as orthonormal column bases.
    """
    top, bottom = R.top, R.bottom
    return RelationParts(
        ker=_orth(top @ _null(bottom)) if R.dim else np.zeros((R.dims[0], 0), dtype=complex),
        ran=_orth(bottom),
        mul=_orth(bottom @ _null(top)) if R.dim else np.zeros((R.dims[1], 0), dtype=complex),
        dom=_orth(top),
    )


def annihilator(basis: np.ndarray, pairing: DualPairing) -> np.ndarray:
    """{y : pairing(y, x) = 0 for every x in ran basis}, as an orthonormal basis."""
    if basis.shape[0] != pairing.dim:
        raise IndexSetMismatch(f"subspace of C^{basis.shape[0]} against a pairing on C^{pairing.dim}")
    return _null(basis.conj().T @ pairing.matrix)


def adjoint_relation(R: LinearRelation, pair1: DualPairing, pair2: DualPairing) -> LinearRelation:
    """
    A* = {(y2, y1) : <y2, x2> = <y1, x1> for all (x1, x2) in A}, the null
    space of the rows [x2^H M2, -x1^H M1] over the basis of A.
    """
    n1, n2 = R.dims
    if pair1.dim != n1 or pair2.dim != n2:
        raise IndexSetMismatch(f"relation in C^{n1} x C^{n2}, pairings on C^{pair1.dim} and C^{pair2.dim}")
    conditions = np.hstack([R.bottom.conj().T @ pair2.matrix, -(R.top.conj().T @ pair1.matrix)])
    return LinearRelation((n2, n1), _null(conditions))


def relations_equal(a: LinearRelation, b: LinearRelation, tol: Optional[float] = None) -> bool:
    tol = getattr(settings, "ALGEBRAIC_TOL", 1e-12) if tol is None else tol
    return a.dims == b.dims and subspace_distance(a.basis, b.basis) <= tol


def relation_to_matrix(R: LinearRelation) -> np.ndarray:
    """The matrix of a single-valued, everywhere defined relation: bottom @ pinv(top)."""
    parts = relation_parts(R)
    if parts.mul.shape[1]:
        raise GelfandError(f"relation is multivalued (dim mul = {parts.mul.shape[1]})")
    if parts.dom.shape[1] != R.dims[0]:
        raise GelfandError(f"relation is not everywhere defined (dim dom = {parts.dom.shape[1]})")
    return R.bottom @ np.linalg.pinv(R.top)


# -------------------------
# Appendix checks
# -------------------------
def _condition(m: np.ndarray, label: str) -> float:
    kappa = float(np.linalg.cond(m))
    if not math.isfinite(kappa) or kappa > 1.0 / np.finfo(float).eps:
        raise NotInvertible(f"{label} is singular (condition {kappa:.3e})")
    return kappa


def change_of_pairing_check(A, psi1, psi2, tolerance: Optional[float] = None) -> dict:
    """
    Adjoint of A under the Z pairings equals psi1 A^H psi2^{-1}, where Z_i is
    paired with X_i through psi_i^{-1}. The left side goes through
    adjoint_relation; residual is entrywise, relative to the right side.
    """
    A = np.atleast_2d(np.asarray(A, dtype=complex))
    psi1 = np.atleast_2d(np.asarray(psi1, dtype=complex))
    psi2 = np.atleast_2d(np.asarray(psi2, dtype=complex))
    n2, n1 = A.shape
    if psi1.shape != (n1, n1) or psi2.shape != (n2, n2):
        raise IndexSetMismatch(f"A is {A.shape}, psi1 {psi1.shape}, psi2 {psi2.shape}")
    k1, k2 = _condition(psi1, "psi1"), _condition(psi2, "psi2")
    tolerance = getattr(settings, "ALGEBRAIC_TOL", 1e-12) if tolerance is None else tolerance

    z_adjoint = adjoint_relation(LinearRelation.graph(A),
                                 DualPairing(np.linalg.inv(psi1)), DualPairing(np.linalg.inv(psi2)))
    lhs = relation_to_matrix(z_adjoint)
    rhs = psi1 @ A.conj().T @ np.linalg.inv(psi2)
    residual = float(np.max(np.abs(lhs - rhs))) / max(1.0, float(np.max(np.abs(rhs))))
    limit = tolerance * k1 * k2
    return {
        "name": "change_of_pairing",
        "ok": residual <= limit,
        "max_residual": residual,
        "tolerance": limit,
        "kappa_psi1": k1,
        "kappa_psi2": k2,
    }


def von_neumann_check(Tmat, seed: int = 0, tolerance: Optional[float] = None) -> dict:
    """
    T*T and TT* are Hermitian, I + T*T and I + TT* have spectrum >= 1 and are
    solvable. In finite dimensions dom T*T is the whole space, so it is a core.
    """
    t = np.atleast_2d(np.asarray(Tmat, dtype=complex))
    tolerance = getattr(settings, "ALGEBRAIC_TOL", 1e-12) if tolerance is None else tolerance
    rng = np.random.default_rng(seed)
    residuals = {}
    min_eigs = {}
    for label, prod in (("star_t", t.conj().T @ t), ("t_star", t @ t.conj().T)):
        n = prod.shape[0]
        scale = max(1.0, float(np.max(np.abs(prod))))
        residuals[f"hermitian_{label}"] = float(np.max(np.abs(prod - prod.conj().T))) / scale
        shifted = np.eye(n) + 0.5 * (prod + prod.conj().T)
        min_eigs[label] = float(scipy.linalg.eigvalsh(shifted)[0])
        residuals[f"spectrum_{label}"] = max(0.0, 1.0 - min_eigs[label])
        h = complex_gaussian(rng, n)
        x = scipy.linalg.solve(shifted, h, assume_a="her")
        residuals[f"solve_{label}"] = float(np.linalg.norm(shifted @ x - h)) / float(np.linalg.norm(h)) / scale
    worst = max(residuals.values())
    return {
        "name": "von_neumann",
        "ok": worst <= tolerance,
        "max_residual": worst,
        "tolerance": tolerance,
        "min_eig_star_t": min_eigs["star_t"],
        "min_eig_t_star": min_eigs["t_star"],
        "residuals": residuals,
        "core": True,
    }


def check_adjoint_identities(count: int = 100, seed: int = 0, max_dim: int = 4,
                             tolerance: Optional[float] = None) -> dict:
    """
    On random relations under canonical and random SPD pairings:
    (A*)* = A (canonical), ker A* = (ran A)^perp, mul A* = (dom A)^perp.
    """
    tolerance = getattr(settings, "ALGEBRAIC_TOL", 1e-12) if tolerance is None else tolerance
    rng = np.random.default_rng(seed)
    involution = ResidualTracker("adjoint_involution", tolerance)
    kernel = ResidualTracker("kernel_annihilator", tolerance)
    multivalued = ResidualTracker("mul_annihilator", tolerance)
    for _ in range(count):
        n1, n2 = (int(v) for v in rng.integers(1, max_dim + 1, size=2))
        k = int(rng.integers(0, n1 + n2 + 1))
        R = LinearRelation.span(n1, n2, _random_matrix(rng, n1 + n2, k))
        case = lambda R=R: relation_to_json(R)

        canonical = adjoint_relation(R, DualPairing.canonical(n1), DualPairing.canonical(n2))
        back = adjoint_relation(canonical, DualPairing.canonical(n2), DualPairing.canonical(n1))
        involution.update(subspace_distance(back.basis, R.basis), case)

        pair1 = DualPairing(random_spd_matrix(n1, 10.0, rng))
        pair2 = DualPairing(random_spd_matrix(n2, 10.0, rng))
        adj = relation_parts(adjoint_relation(R, pair1, pair2))
        parts = relation_parts(R)
        kernel.update(subspace_distance(adj.ker, annihilator(parts.ran, pair2)), case)
        multivalued.update(subspace_distance(adj.mul, annihilator(parts.dom, pair1)), case)
    return merge_reports("adjoint_identities", [involution.report(), kernel.report(), multivalued.report()])


def check_change_of_pairing(count: int = 100, seed: int = 0, dim: int = 5, max_condition: float = 10.0,
                            tolerance: Optional[float] = None) -> dict:
    tolerance = getattr(settings, "ALGEBRAIC_TOL", 1e-12) if tolerance is None else tolerance
    rng = np.random.default_rng(seed)
    tracker = ResidualTracker("change_of_pairing", tolerance)
    for _ in range(count):
        A = _random_matrix(rng, dim, dim)
        psi1 = random_spd_matrix(dim, max_condition, rng)
        psi2 = random_spd_matrix(dim, max_condition, rng)
        result = change_of_pairing_check(A, psi1, psi2, tolerance)
        # normalized so every sample is judged against its own kappa product
        tracker.update(result["max_residual"] / (result["kappa_psi1"] * result["kappa_psi2"]),
                       lambda A=A: {"A": [[[z.real, z.imag] for z in row] for row in A]})
    return tracker.report()


def check_von_neumann(count: int = 100, seed: int = 0, shape: Tuple[int, int] = (6, 4),
                      tolerance: Optional[float] = None) -> dict:
    rng = np.random.default_rng(seed)
    tolerance = getattr(settings, "ALGEBRAIC_TOL", 1e-12) if tolerance is None else tolerance
    tracker = ResidualTracker("von_neumann", tolerance)
    for _ in range(count):
        t = _random_matrix(rng, *shape)
        result = von_neumann_check(t, seed=int(rng.integers(0, 2**31)), tolerance=tolerance)
        tracker.update(result["max_residual"], lambda t=t: {"T": [[[z.real, z.imag] for z in row] for row in t]})
    return tracker.report()


# -------------------------
# Cesaro selection
# -------------------------
def cesaro_select(vectors: Sequence[CoeffVector], N: int) -> CesaroResult:
    """
    Greedy subsequence with |<x_{n(k)}, x_{n(j)}>| <= 1/k for all j < k:
    n(1) is the first vector, each next pick is the first admissible later
    index. For a bounded weakly null sequence such picks always exist, which
    is where uniform boundedness enters; here a finite sequence may run out.
    """
    if N < 1:
        raise GelfandError(f"N must be positive, got {N}")
    if not vectors:
        raise EmptyVector("cesaro_select needs a nonempty sequence")
    picks: List[int] = [0]
    cursor = 1
    for k in range(2, N + 1):
        bound = 1.0 / k
        while cursor < len(vectors):
            candidate = vectors[cursor]
            cursor += 1
            if all(abs(pivot_inner(candidate, vectors[j])) <= bound for j in picks):
                picks.append(cursor - 1)
                break
        else:
            raise SelectionExhausted(f"sequence exhausted after {len(picks)} of {N} picks", picks)

    total = CoeffVector.zeros(vectors[0].index_set)
    for j in picks:
        total = total + vectors[j]
    norm = pivot_norm(total) / N
    c = max(pivot_norm(vectors[j]) for j in picks)
    harmonic = math.fsum(1.0 / k for k in range(1, N + 1))
    bound = c * c / N + 2.0 * (N - harmonic) / (N * N)
    log_bound = c * c / N + math.log(N) / N
    slack = 4 * np.finfo(float).eps * max(1.0, log_bound)
    return CesaroResult(tuple(picks), norm, c, bound, log_bound, norm * norm <= log_bound + slack)


def check_cesaro(seed: int = 0, n: int = 100) -> dict:
    """Orthonormal e_1..e_n gives Cesaro norm 1/sqrt(n); random unit sequences meet the selection bound."""
    tolerance = getattr(settings, "ALGEBRAIC_TOL", 1e-12)
    index_set = IndexSet.finite(n)
    exact = ResidualTracker("cesaro_orthonormal", tolerance)
    result = cesaro_select([CoeffVector.basis(index_set, i) for i in index_set.indices()], n)
    exact.update(abs(result.cesaro_norm - 1.0 / math.sqrt(n)) + (0.0 if result.log_bound_holds else 1.0),
                 lambda: {"n": n})

    rng = np.random.default_rng(seed)
    bounded = ResidualTracker("cesaro_bound", tolerance)
    for trial in range(10):
        big = IndexSet.finite(4 * n)
        seq = []
        for _ in range(4 * n):
            v = random_vector(big, rng, size=int(rng.integers(1, 4)))
            seq.append(v * (1.0 / pivot_norm(v)))
        try:
            picked = cesaro_select(seq, 8)
        except SelectionExhausted:
            continue
        bounded.update(max(0.0, picked.cesaro_norm ** 2 - picked.bound), lambda t=trial: {"trial": t})
    return merge_reports("cesaro", [exact.report(), bounded.report()],
                         cesaro_norm=result.cesaro_norm, log_bound=result.log_bound)


# -------------------------
# JSON codec
# -------------------------
def relation_to_json(R: LinearRelation) -> dict:
    return {
        "dims": list(R.dims),
        "basis_columns": [[[z.real, z.imag] for z in col] for col in R.basis.T],
    }


def relation_from_json(obj: dict) -> LinearRelation:
    if not isinstance(obj, dict) or "dims" not in obj:
        raise ParseError("relation JSON needs 'dims' and 'basis_columns'")
    try:
        n1, n2 = (int(d) for d in obj["dims"])
        columns = [[complex(*x) if isinstance(x, (list, tuple)) else complex(x) for x in col]
                   for col in obj.get("basis_columns", [])]
    except (TypeError, ValueError) as e:
        raise ParseError(f"bad relation JSON: {e}") from e
    if any(len(col) != n1 + n2 for col in columns):
        raise ParseError(f"basis columns must have length {n1 + n2}")
    basis = np.array(columns, dtype=complex).T if columns else np.zeros((n1 + n2, 0), dtype=complex)
    return LinearRelation((n1, n2), basis)
