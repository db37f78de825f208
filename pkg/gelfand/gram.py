# gelfand/gram.py
"""
Gram operators and their functional calculus.

A Gram operator G is positive, self-adjoint and injective; it encodes a quasi
Gelfand triple completely (||f||_+ = ||G^{1/2} f||_0, ||g||_- = ||G^{-1/2} g||_0).
Three representations:
- analytic diagonal: weights w(i) given by a formula over Z\\{0}
- finite diagonal:   positive lambdas over {1..n}
- dense:             Hermitian positive definite n x n matrix, with its
                     eigendecomposition computed once at construction

Spectral cuts are always taken on the spectrum of G^{1/2} (the sqrt(lambda)
scale), with half-open cells (a, b].
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.linalg
import scipy.special

from config import settings
from gelfand.core import CoeffVector, IndexSet, TolerancePolicy
from gelfand.errors import (
    EigenResidualError,
    GelfandError,
    IndexSetMismatch,
    InvalidInterval,
    InvalidRange,
    NotInjective,
    NotSelfAdjoint,
    ParseError,
)

logger = logging.getLogger("gram")
logger.setLevel(logging.INFO)

ANALYTIC = "analytic"
FINITE_DIAGONAL = "finite_diagonal"
DENSE = "dense"

PAPER_ELL2 = "paper_ell2"
POWER = "power"
TABLE = "table"


# -------------------------
# Weight formulas
# -------------------------
@dataclass(frozen=True)
class WeightSpec:
    """
    Diagonal weights over Z\\{0}.

    paper_ell2: w(n) = n^2 and w(-n) = 1/n^2 for n > 0
    power:      w(n) = |n|^alpha; with sign_split the negative side gets |n|^-alpha
    table:      explicit weights, default_weight elsewhere
    """
    kind: str
    alpha: float = 0.0
    sign_split: bool = True
    table: Tuple[Tuple[int, float], ...] = ()
    default_weight: float = 1.0

    def __post_init__(self):
        if self.kind not in (PAPER_ELL2, POWER, TABLE):
            raise GelfandError(f"unknown weight kind {self.kind!r}")
        if self.kind == TABLE:
            if not self.default_weight > 0 or any(not w > 0 for _, w in self.table):
                raise NotInjective("table weights must be strictly positive")
            if any(i == 0 for i, _ in self.table):
                raise IndexSetMismatch("index 0 is not in Z\\{0}")

    def power_of(self, i: int, p: float) -> float:
        """w(i)**p, evaluated without an intermediate reciprocal where possible."""
        n = abs(i)
        if self.kind == PAPER_ELL2:
            return float(n) ** (2.0 * p) if i > 0 else float(n) ** (-2.0 * p)
        if self.kind == POWER:
            exponent = self.alpha * p
            if i < 0 and self.sign_split:
                exponent = -exponent
            return float(n) ** exponent
        return dict(self.table).get(i, self.default_weight) ** p

    def weight(self, i: int) -> float:
        return self.power_of(i, 1.0)

    def condition_number(self) -> float:
        if self.kind == TABLE:
            values = [w for _, w in self.table] + [self.default_weight]
            return max(values) / min(values)
        if self.kind == POWER and self.alpha == 0:
            return 1.0
        return math.inf

    def to_json(self):
        if self.kind == PAPER_ELL2:
            return PAPER_ELL2
        if self.kind == POWER:
            return {"kind": POWER, "alpha": self.alpha, "sign_split": self.sign_split}
        return {"kind": TABLE, "entries": [[i, w] for i, w in self.table],
                "default": self.default_weight}

    @classmethod
    def from_json(cls, obj) -> "WeightSpec":
        if obj == PAPER_ELL2:
            return cls(PAPER_ELL2)
        if not isinstance(obj, dict):
            raise ParseError(f"bad weight spec {obj!r}")
        try:
            if obj.get("kind") == POWER:
                return cls(POWER, alpha=float(obj["alpha"]), sign_split=bool(obj.get("sign_split", True)))
            if obj.get("kind") == TABLE:
                table = tuple((int(i), float(w)) for i, w in obj.get("entries", []))
                return cls(TABLE, table=table, default_weight=float(obj.get("default", 1.0)))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"bad weight spec {obj!r}: {e}") from e
        raise ParseError(f"bad weight spec {obj!r}")


# -------------------------
# Eigendecomposition
# -------------------------
@dataclass(frozen=True, eq=False)
class EigenDecomposition:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @classmethod
    def compute(cls, matrix: np.ndarray) -> "EigenDecomposition":
        """
        eigh on the Hermitian part of `matrix`; every pair must satisfy
        ||A v - lambda v|| <= EIGEN_RESIDUAL_FACTOR * n * eps * ||A|| and the
        eigenvector matrix must be unitary within ALGEBRAIC_TOL.
        """
        a = 0.5 * (matrix + matrix.conj().T)
        lam, vec = scipy.linalg.eigh(a)
        n = a.shape[0]
        scale = float(np.max(np.abs(lam))) if n else 0.0
        bound = getattr(settings, "EIGEN_RESIDUAL_FACTOR", 64) * n * np.finfo(float).eps * max(scale, 1e-300)
        residuals = np.linalg.norm(a @ vec - vec * lam, axis=0)
        worst = float(np.max(residuals)) if n else 0.0
        if worst > bound:
            raise EigenResidualError(f"eigenpair residual {worst:.3e} exceeds bound {bound:.3e}")
        decomposition = cls(lam, vec)
        drift = decomposition.unitarity_residual()
        if drift > getattr(settings, "ALGEBRAIC_TOL", 1e-12):
            raise EigenResidualError(f"eigenvector matrix is not unitary: |V^H V - I| = {drift:.3e}")
        logger.debug(f"eigendecomposition n={n} worst residual {worst:.3e}, unitarity {drift:.3e}")
        return decomposition

    def unitarity_residual(self) -> float:
        v = self.eigenvectors
        return float(np.max(np.abs(v.conj().T @ v - np.eye(v.shape[1])))) if v.size else 0.0


# -------------------------
# Gram operator
# -------------------------
@dataclass(frozen=True, eq=False)
class GramOperator:
    kind: str
    index_set: IndexSet
    weight: Optional[WeightSpec] = None
    lambdas: Optional[np.ndarray] = None
    matrix: Optional[np.ndarray] = None
    eigen: Optional[EigenDecomposition] = None

    @classmethod
    def analytic(cls, weight: WeightSpec) -> "GramOperator":
        return cls(ANALYTIC, IndexSet.symmetric(), weight=weight)

    @classmethod
    def finite_diagonal(cls, lambdas: Sequence[float]) -> "GramOperator":
        lam = np.asarray(lambdas, dtype=float).reshape(-1)
        if lam.size == 0:
            raise GelfandError("finite diagonal operator needs at least one entry")
        return cls(FINITE_DIAGONAL, IndexSet.finite(lam.size), lambdas=lam)

    @classmethod
    def identity(cls, n: int) -> "GramOperator":
        return cls.finite_diagonal(np.ones(n))

    @classmethod
    def dense(cls, matrix) -> "GramOperator":
        a = np.asarray(matrix, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] == 0:
            raise GelfandError(f"dense Gram operator needs a square matrix, got shape {a.shape}")
        return cls(DENSE, IndexSet.finite(a.shape[0]), matrix=a, eigen=EigenDecomposition.compute(a))

    @property
    def dim(self) -> Optional[int]:
        return self.index_set.size

    def spectrum(self) -> np.ndarray:
        """Ascending eigenvalues (finite kinds only)."""
        if self.kind == FINITE_DIAGONAL:
            return np.sort(self.lambdas)
        if self.kind == DENSE:
            return self.eigen.eigenvalues
        raise GelfandError("analytic operators have no finite spectrum listing")

    def sqrt_spectrum(self) -> np.ndarray:
        return np.sqrt(self.spectrum())

    def condition_number(self) -> float:
        if self.kind == ANALYTIC:
            return self.weight.condition_number()
        lam = self.spectrum()
        if lam[0] <= 0:
            return math.inf
        return float(lam[-1] / lam[0])

    def sqrt_weight(self, i: int) -> float:
        """sqrt(lambda_i) for diagonal kinds."""
        if self.kind == ANALYTIC:
            return self.weight.power_of(i, 0.5)
        if self.kind == FINITE_DIAGONAL:
            return float(math.sqrt(self.lambdas[i - 1]))
        raise GelfandError("dense operators have no diagonal weights")

    def to_matrix(self) -> np.ndarray:
        if self.kind == FINITE_DIAGONAL:
            return np.diag(self.lambdas).astype(complex)
        if self.kind == DENSE:
            return self.matrix
        raise GelfandError("analytic operators cannot be materialized")


def _check_domain(G: GramOperator, f: CoeffVector) -> None:
    if f.index_set != G.index_set:
        raise IndexSetMismatch(f"vector over {f.index_set.label} given to operator over {G.index_set.label}")


def apply_function(G: GramOperator, f: CoeffVector, fn: Callable) -> CoeffVector:
    """
    fn(G) f for a spectral function fn (must accept scalars and numpy arrays).
    """
    _check_domain(G, f)
    if G.kind == ANALYTIC:
        return f.scaled_by_index(lambda i: fn(G.weight.weight(i)))
    if G.kind == FINITE_DIAGONAL:
        return f.scaled_by_index(lambda i: fn(G.lambdas[i - 1]))
    lam, v = G.eigen.eigenvalues, G.eigen.eigenvectors
    x = f.to_array()
    return CoeffVector.from_array(f.index_set, v @ (fn(lam) * (v.conj().T @ x)))


def gram_apply(G: GramOperator, f: CoeffVector, power: float) -> CoeffVector:
    """G^power f."""
    _check_domain(G, f)
    if G.kind == ANALYTIC:
        return f.scaled_by_index(lambda i: G.weight.power_of(i, power))
    if G.kind == FINITE_DIAGONAL:
        return f.scaled_by_index(lambda i: G.lambdas[i - 1] ** power)
    if power == 1:
        return CoeffVector.from_array(f.index_set, G.matrix @ f.to_array())
    return apply_function(G, f, lambda lam: lam ** power)


def inverse_gram(G: GramOperator) -> GramOperator:
    """G^{-1}, in the same representation; it is the Gram operator of the swapped triple."""
    if G.kind == ANALYTIC:
        w = G.weight
        if w.kind == PAPER_ELL2:
            return GramOperator.analytic(WeightSpec(POWER, alpha=-2.0, sign_split=True))
        if w.kind == POWER:
            return GramOperator.analytic(WeightSpec(POWER, alpha=-w.alpha, sign_split=w.sign_split))
        return GramOperator.analytic(WeightSpec(
            TABLE, table=tuple((i, 1.0 / x) for i, x in w.table), default_weight=1.0 / w.default_weight))
    if G.kind == FINITE_DIAGONAL:
        return GramOperator.finite_diagonal(1.0 / G.lambdas)
    lam, v = G.eigen.eigenvalues, G.eigen.eigenvectors
    inv = (v / lam) @ v.conj().T
    return GramOperator.dense(0.5 * (inv + inv.conj().T))


def random_spd_matrix(dim: int, condition: float, rng: np.random.Generator) -> np.ndarray:
    """
    Hermitian positive definite matrix with spectrum in [1, condition]:
    log-uniform interior eigenvalues, both endpoints attained, conjugated by a
    Haar-distributed unitary (QR of a complex Ginibre matrix, phases fixed).
    """
    if dim < 1:
        raise GelfandError(f"dimension must be positive, got {dim}")
    if condition < 1:
        raise GelfandError(f"condition number must be >= 1, got {condition}")
    if dim == 1:
        exponents = np.zeros(1)
    else:
        exponents = np.concatenate(([0.0], np.sort(rng.uniform(0.0, 1.0, dim - 2)), [1.0]))
    lam = condition ** exponents
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / math.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    q = q * (d / np.abs(d))
    a = (q * lam) @ q.conj().T
    return 0.5 * (a + a.conj().T)


# -------------------------
# Intervals on the sqrt(lambda) scale
# -------------------------
@dataclass(frozen=True)
class Interval:
    """Half-open (lower, upper]; upper may be math.inf."""
    lower: float
    upper: float

    def __post_init__(self):
        if math.isnan(self.lower) or math.isnan(self.upper):
            raise InvalidInterval("interval endpoints must be numbers")
        if self.lower < 0:
            raise InvalidInterval(f"interval ({self.lower}, {self.upper}] reaches below 0")
        if self.lower >= self.upper:
            raise InvalidInterval(f"empty interval ({self.lower}, {self.upper}]")

    def contains(self, x: float) -> bool:
        return self.lower < x <= self.upper if math.isfinite(self.upper) else self.lower < x

    @property
    def bounded(self) -> bool:
        return math.isfinite(self.upper)


@dataclass(frozen=True)
class CutSet:
    """Finite union of half-open intervals, kept sorted and merged."""
    intervals: Tuple[Interval, ...] = ()

    def __post_init__(self):
        cells = sorted(self.intervals, key=lambda c: (c.lower, c.upper))
        merged: List[Interval] = []
        for cell in cells:
            if merged and cell.lower <= merged[-1].upper:
                last = merged.pop()
                cell = Interval(last.lower, max(last.upper, cell.upper))
            merged.append(cell)
        object.__setattr__(self, "intervals", tuple(merged))

    @classmethod
    def of(cls, *pairs: Tuple[float, float]) -> "CutSet":
        return cls(tuple(Interval(float(a), float(b)) for a, b in pairs))

    @classmethod
    def default(cls) -> "CutSet":
        return cls.of((0.0, 1.0))

    @classmethod
    def parse(cls, text: str) -> "CutSet":
        """'0:1' or '0:1,2:3'; 'inf' allowed as an upper end."""
        pairs = []
        try:
            for chunk in text.split(","):
                a, b = chunk.strip().split(":")
                pairs.append((float(a), float(b)))
        except ValueError as e:
            raise InvalidInterval(f"cannot parse cut {text!r}: expected a:b[,c:d]") from e
        return cls.of(*pairs)

    @property
    def is_empty(self) -> bool:
        return not self.intervals

    @property
    def bounded(self) -> bool:
        return all(c.bounded for c in self.intervals)

    def contains(self, x: float) -> bool:
        return any(c.contains(x) for c in self.intervals)

    def complement(self) -> "CutSet":
        """Complement inside (0, inf)."""
        gaps = []
        cursor = 0.0
        for cell in self.intervals:
            if cell.lower > cursor:
                gaps.append(Interval(cursor, cell.lower))
            cursor = cell.upper
        if math.isfinite(cursor):
            gaps.append(Interval(cursor, math.inf))
        return CutSet(tuple(gaps))

    def to_json(self) -> list:
        return [[c.lower, c.upper if c.bounded else None] for c in self.intervals]

    @classmethod
    def from_json(cls, obj) -> "CutSet":
        try:
            return cls.of(*[(a, math.inf if b is None else b) for a, b in obj])
        except (TypeError, ValueError) as e:
            raise ParseError(f"bad cut {obj!r}: {e}") from e


def as_cut(interval: Union[Interval, CutSet, Tuple[float, float]]) -> CutSet:
    if isinstance(interval, CutSet):
        return interval
    if isinstance(interval, Interval):
        return CutSet((interval,))
    a, b = interval
    return CutSet.of((a, b))


# -------------------------
# Spectral projections
# -------------------------
@dataclass(frozen=True, eq=False)
class SpectralProjection:
    """
    E(cut) for the spectrum of G^{1/2}. Diagonal kinds act as index masks,
    dense kinds as V_S V_S^H built from whole eigenvalue clusters.
    """
    gram: GramOperator
    cut: CutSet
    columns: Optional[np.ndarray] = None

    def contains_index(self, i: int) -> bool:
        return self.cut.contains(self.gram.sqrt_weight(i))

    def apply(self, f: CoeffVector) -> CoeffVector:
        _check_domain(self.gram, f)
        if self.gram.kind != DENSE:
            return f.restrict(self.contains_index)
        c = self.columns
        return CoeffVector.from_array(f.index_set, c @ (c.conj().T @ f.to_array()))

    @property
    def rank(self) -> Optional[int]:
        if self.gram.kind == DENSE:
            return int(self.columns.shape[1])
        if self.gram.kind == FINITE_DIAGONAL:
            return sum(1 for i in self.gram.index_set.indices() if self.contains_index(i))
        return None

    def matrix(self) -> np.ndarray:
        if self.gram.kind == DENSE:
            return self.columns @ self.columns.conj().T
        if self.gram.kind == FINITE_DIAGONAL:
            return np.diag([1.0 if self.contains_index(i) else 0.0
                            for i in self.gram.index_set.indices()]).astype(complex)
        raise GelfandError("analytic projections are index predicates, not matrices")


def eigen_clusters(eigenvalues: np.ndarray, tol: float) -> List[Tuple[int, int]]:
    """[start, stop) runs of ascending eigenvalues whose neighbours differ by at most tol."""
    runs, start = [], 0
    for k in range(1, len(eigenvalues) + 1):
        if k == len(eigenvalues) or eigenvalues[k] - eigenvalues[k - 1] > tol:
            runs.append((start, k))
            start = k
    return runs


def dense_cut_mask(G: GramOperator, cut: CutSet) -> np.ndarray:
    """
    Column mask of the eigenvectors whose sqrt(lambda) lies in `cut`.

    Membership is decided once per eigenvalue cluster (gaps up to
    algebraic_tol * ||G||). A cluster within that tolerance of an endpoint
    squared is placed exactly on the endpoint, so sqrt(lambda) = b always
    lands in (a, b].
    """
    lam = G.eigen.eigenvalues
    tol = getattr(settings, "ALGEBRAIC_TOL", 1e-12) * max(float(np.max(np.abs(lam))), 1e-300)
    endpoints = sorted({e for c in cut.intervals for e in (c.lower, c.upper) if 0 < e < math.inf})
    mask = np.zeros(lam.size, dtype=bool)
    for start, stop in eigen_clusters(lam, tol):
        centre = float(np.mean(lam[start:stop]))
        root = math.sqrt(max(centre, 0.0))
        for e in endpoints:
            if abs(centre - e * e) <= tol:
                root = e
                break
        mask[start:stop] = cut.contains(root)
    return mask


def spectral_projection(G: GramOperator, interval) -> SpectralProjection:
    cut = as_cut(interval)
    if G.kind != DENSE:
        return SpectralProjection(G, cut)
    return SpectralProjection(G, cut, columns=G.eigen.eigenvectors[:, dense_cut_mask(G, cut)])


# -------------------------
# Validation
# -------------------------
def validate_gram(G: GramOperator, tolerance: Optional[TolerancePolicy] = None) -> dict:
    """
    Raises NotSelfAdjoint / NotInjective; otherwise returns a report with the
    Hermitian residual, extreme eigenvalues and the condition number.
    """
    tolerance = tolerance or TolerancePolicy.from_settings()
    ratio = getattr(settings, "INJECTIVITY_RATIO", 1e-14)
    hermitian_residual = 0.0

    if G.kind == ANALYTIC:
        window = getattr(settings, "DESCRIBE_WINDOW", 4096)
        probe = [G.weight.weight(i) for i in range(-window, window + 1) if i != 0]
        lo, hi = min(probe), max(probe)
        if not all(w > 0 and math.isfinite(w) for w in probe):
            raise NotInjective("weights must be finite and strictly positive; "
                               "ker G splits off orthogonally, restrict to cl(ran G) first")
    else:
        if G.kind == DENSE:
            a = G.matrix
            scale = max(float(np.max(np.abs(a))), 1e-300)
            hermitian_residual = float(np.max(np.abs(a - a.conj().T))) / scale
            if hermitian_residual > tolerance.algebraic_tol:
                raise NotSelfAdjoint(f"Hermitian residual {hermitian_residual:.3e} exceeds "
                                     f"{tolerance.algebraic_tol:.1e}")
        lam = G.spectrum()
        lo, hi = float(lam[0]), float(lam[-1])
        if lo <= 0 or lo < ratio * hi:
            raise NotInjective(f"minimum eigenvalue {lo:.3e} (max {hi:.3e}): G has a kernel; "
                               "ker G splits off orthogonally, restrict to cl(ran G) first")

    return {
        "ok": True,
        "kind": G.kind,
        "hermitian_residual": hermitian_residual,
        "min_eigenvalue": lo,
        "max_eigenvalue": hi,
        "condition": G.condition_number(),
    }


# -------------------------
# Closed-form weight sums
# -------------------------
def inverse_square_sum(m: int, n: int) -> float:
    """sum_{i=m}^{n} 1/i^2; compensated summation up to EXACT_SUM_LIMIT terms."""
    if m < 1 or m > n:
        raise InvalidRange(f"need 1 <= m <= n, got m={m}, n={n}")
    if n - m + 1 <= getattr(settings, "EXACT_SUM_LIMIT", 10**6):
        ks = np.arange(m, n + 1, dtype=float)
        return math.fsum(1.0 / (ks * ks))
    return float(scipy.special.zeta(2.0, m) - scipy.special.zeta(2.0, n + 1))


def inverse_square_tail(m: int) -> float:
    """sum_{i>=m} 1/i^2 (Hurwitz zeta)."""
    if m < 1:
        raise InvalidRange(f"tail start must be >= 1, got {m}")
    return float(scipy.special.zeta(2.0, m))


def inverse_square_tail_bound(m: int) -> float:
    """Integral bound sum_{i>=m} 1/i^2 <= 1/(m-1)."""
    return 1.0 / (m - 1) if m >= 2 else math.inf


# -------------------------
# JSON codec
# -------------------------
def _complex_entry(x) -> complex:
    if isinstance(x, (list, tuple)):
        re, im = x
        return complex(float(re), float(im))
    return complex(float(x))


def gram_to_json(G: GramOperator) -> dict:
    if G.kind == ANALYTIC:
        return {"kind": "analytic", "weight": G.weight.to_json()}
    if G.kind == FINITE_DIAGONAL:
        return {"kind": FINITE_DIAGONAL, "lambdas": [float(x) for x in G.lambdas]}
    return {"kind": DENSE, "matrix": [[[z.real, z.imag] for z in row] for row in G.matrix]}


def gram_from_json(obj: dict) -> GramOperator:
    if not isinstance(obj, dict):
        raise ParseError("Gram JSON must be an object")
    kind = obj.get("kind")
    try:
        if kind == "analytic":
            return GramOperator.analytic(WeightSpec.from_json(obj.get("weight")))
        if kind == FINITE_DIAGONAL:
            return GramOperator.finite_diagonal([float(x) for x in obj["lambdas"]])
        if kind == DENSE:
            rows = [[_complex_entry(x) for x in row] for row in obj["matrix"]]
            return GramOperator.dense(np.array(rows, dtype=complex))
    except (KeyError, TypeError, ValueError) as e:
        if isinstance(e, GelfandError):
            raise
        raise ParseError(f"bad Gram JSON: {e}") from e
    raise ParseError(f"unknown Gram kind {kind!r}")
