# gelfand/core.py
"""
Substrate every other module computes over.

- IndexSet: finite {1..n} or the symmetric integers Z\\{0}
- CoeffVector: finitely supported complex coefficient vectors (zeros pruned)
- GridFunction: sampled functions on a uniform midpoint grid
- TolerancePolicy: algebraic / oracle tolerances, optionally scaled by kappa(G)
- pivot_inner / pivot_norm / vec_axpy: the pivot-space (X0) geometry
- random_vector: seeded test vectors

All values are immutable after construction and safe to share between threads.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from config import settings
from gelfand.errors import GelfandError, IndexSetMismatch, ParseError

FINITE = "finite"
SYMMETRIC = "symmetric"


# -------------------------
# Index sets
# -------------------------
@dataclass(frozen=True)
class IndexSet:
    kind: str
    size: Optional[int] = None

    def __post_init__(self):
        if self.kind == FINITE:
            if not isinstance(self.size, (int, np.integer)) or self.size < 1:
                raise GelfandError(f"finite index set needs a positive size, got {self.size!r}")
        elif self.kind == SYMMETRIC:
            if self.size is not None:
                raise GelfandError("symmetric index set takes no size")
        else:
            raise GelfandError(f"unknown index set kind: {self.kind!r}")

    @classmethod
    def finite(cls, n: int) -> "IndexSet":
        return cls(FINITE, int(n))

    @classmethod
    def symmetric(cls) -> "IndexSet":
        return cls(SYMMETRIC)

    @property
    def is_finite(self) -> bool:
        return self.kind == FINITE

    @property
    def label(self) -> str:
        return f"finite:{self.size}" if self.is_finite else SYMMETRIC

    @classmethod
    def from_label(cls, label: str) -> "IndexSet":
        if label == SYMMETRIC:
            return cls.symmetric()
        if isinstance(label, str) and label.startswith("finite:"):
            try:
                return cls.finite(int(label.split(":", 1)[1]))
            except (ValueError, GelfandError) as e:
                raise ParseError(f"bad index set label {label!r}: {e}") from e
        raise ParseError(f"bad index set label {label!r}")

    def contains(self, i: int) -> bool:
        if self.is_finite:
            return 1 <= i <= self.size
        return i != 0

    def indices(self) -> List[int]:
        """All indices of a finite set, in order."""
        if not self.is_finite:
            raise GelfandError("the symmetric integers cannot be enumerated")
        return list(range(1, self.size + 1))


# -------------------------
# Coefficient vectors
# -------------------------
@dataclass(frozen=True)
class CoeffVector:
    """
    Finitely supported vector over an index set.

    `entries` is normalized on construction: sorted by index, zero entries
    removed, coefficients coerced to complex. Equality is therefore canonical.
    """
    index_set: IndexSet
    entries: Tuple[Tuple[int, complex], ...] = field(default=())

    def __post_init__(self):
        cleaned: Dict[int, complex] = {}
        for i, c in self.entries:
            i = int(i)
            if i in cleaned:
                raise GelfandError(f"duplicate index {i}")
            if not self.index_set.contains(i):
                raise IndexSetMismatch(f"index {i} not in {self.index_set.label}")
            cleaned[i] = complex(c)
        pruned = tuple((i, c) for i, c in sorted(cleaned.items()) if c != 0)
        object.__setattr__(self, "entries", pruned)

    # constructors
    @classmethod
    def zeros(cls, index_set: IndexSet) -> "CoeffVector":
        return cls(index_set, ())

    @classmethod
    def basis(cls, index_set: IndexSet, i: int, coeff: complex = 1.0) -> "CoeffVector":
        return cls(index_set, ((i, coeff),))

    @classmethod
    def from_mapping(cls, index_set: IndexSet, mapping: Mapping[int, complex]) -> "CoeffVector":
        return cls(index_set, tuple(mapping.items()))

    @classmethod
    def from_array(cls, index_set: IndexSet, values: Sequence[complex]) -> "CoeffVector":
        """Dense coefficients 1..n of a finite index set."""
        if not index_set.is_finite or len(values) != index_set.size:
            raise IndexSetMismatch(f"array of length {len(values)} does not fit {index_set.label}")
        return cls(index_set, tuple((k + 1, v) for k, v in enumerate(values)))

    # views
    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(i for i, _ in self.entries)

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([c for _, c in self.entries], dtype=complex)

    @property
    def is_empty(self) -> bool:
        return not self.entries

    def __len__(self) -> int:
        return len(self.entries)

    def as_dict(self) -> Dict[int, complex]:
        return dict(self.entries)

    def get(self, i: int) -> complex:
        return self.as_dict().get(i, 0j)

    def to_array(self) -> np.ndarray:
        if not self.index_set.is_finite:
            raise GelfandError("dense arrays exist only for finite index sets")
        out = np.zeros(self.index_set.size, dtype=complex)
        for i, c in self.entries:
            out[i - 1] = c
        return out

    def scaled_by_index(self, factor: Callable[[int], complex]) -> "CoeffVector":
        """Multiply entry i by factor(i); diagonal operators act this way."""
        return CoeffVector(self.index_set, tuple((i, c * factor(i)) for i, c in self.entries))

    def restrict(self, keep: Callable[[int], bool]) -> "CoeffVector":
        return CoeffVector(self.index_set, tuple((i, c) for i, c in self.entries if keep(i)))

    # arithmetic
    def __add__(self, other: "CoeffVector") -> "CoeffVector":
        return vec_axpy(1.0, other, self)

    def __sub__(self, other: "CoeffVector") -> "CoeffVector":
        return vec_axpy(-1.0, other, self)

    def __neg__(self) -> "CoeffVector":
        return CoeffVector(self.index_set, tuple((i, -c) for i, c in self.entries))

    def __mul__(self, a: complex) -> "CoeffVector":
        return CoeffVector(self.index_set, tuple((i, a * c) for i, c in self.entries))

    __rmul__ = __mul__


def check_same_index_set(*vectors: CoeffVector) -> IndexSet:
    first = vectors[0].index_set
    for v in vectors[1:]:
        if v.index_set != first:
            raise IndexSetMismatch(f"{first.label} vs {v.index_set.label}")
    return first


def pivot_inner(f: CoeffVector, g: CoeffVector) -> complex:
    """<f, g>_0 = sum f_i conj(g_i); linear in f, antilinear in g."""
    check_same_index_set(f, g)
    gd = g.as_dict()
    common = [i for i in f.support if i in gd]
    if not common:
        return 0j
    fd = f.as_dict()
    fv = np.array([fd[i] for i in common], dtype=complex)
    gv = np.array([gd[i] for i in common], dtype=complex)
    return complex(np.vdot(gv, fv))


def pivot_norm(f: CoeffVector) -> float:
    if f.is_empty:
        return 0.0
    return float(np.linalg.norm(f.coefficients))


def vec_axpy(a: complex, f: CoeffVector, g: CoeffVector) -> CoeffVector:
    """a*f + g with zero entries pruned."""
    index_set = check_same_index_set(f, g)
    out = g.as_dict()
    if a != 0:
        for i, c in f.entries:
            out[i] = out.get(i, 0j) + a * c
    return CoeffVector(index_set, tuple(out.items()))


# -------------------------
# Grid functions
# -------------------------
@dataclass(frozen=True)
class GridFunction:
    grid_size: int
    values: np.ndarray
    cell_weight: float

    def __post_init__(self):
        values = np.asarray(self.values, dtype=complex).reshape(-1)
        if self.grid_size < 1 or values.shape[0] != self.grid_size:
            raise GelfandError(f"grid of size {self.grid_size} got {values.shape[0]} samples")
        if not self.cell_weight > 0:
            raise GelfandError(f"cell weight must be positive, got {self.cell_weight}")
        object.__setattr__(self, "values", values)

    @classmethod
    def uniform(cls, values: Sequence[complex]) -> "GridFunction":
        """Samples on the midpoint grid of [0, 1], weight 1/n per cell."""
        values = np.asarray(values, dtype=complex).reshape(-1)
        return cls(values.shape[0], values, 1.0 / values.shape[0])

    def midpoints(self) -> np.ndarray:
        return (np.arange(self.grid_size) + 0.5) / self.grid_size


# -------------------------
# Tolerances
# -------------------------
@dataclass(frozen=True)
class TolerancePolicy:
    algebraic_tol: float = 1e-12
    oracle_tol: float = 1e-9
    condition_scale: bool = True

    def __post_init__(self):
        if self.algebraic_tol < 0 or self.oracle_tol < 0:
            raise GelfandError("tolerances must be nonnegative")
        if self.algebraic_tol > self.oracle_tol:
            raise GelfandError(
                f"algebraic_tol {self.algebraic_tol} exceeds oracle_tol {self.oracle_tol}"
            )

    @classmethod
    def from_settings(cls) -> "TolerancePolicy":
        return cls(
            algebraic_tol=getattr(settings, "ALGEBRAIC_TOL", 1e-12),
            oracle_tol=getattr(settings, "ORACLE_TOL", 1e-9),
            condition_scale=getattr(settings, "CONDITION_SCALE", True),
        )

    def scaled(self, kappa: float) -> float:
        """Algebraic tolerance times kappa; infinite kappa keeps the fixed value."""
        if self.condition_scale and math.isfinite(kappa):
            return self.algebraic_tol * max(1.0, kappa)
        return self.algebraic_tol

    def to_json(self) -> dict:
        return {
            "algebraic": self.algebraic_tol,
            "oracle": self.oracle_tol,
            "condition_scale": self.condition_scale,
        }

    @classmethod
    def from_json(cls, obj: Optional[dict]) -> "TolerancePolicy":
        base = cls.from_settings()
        if not obj:
            return base
        try:
            return cls(
                algebraic_tol=float(obj.get("algebraic", base.algebraic_tol)),
                oracle_tol=float(obj.get("oracle", base.oracle_tol)),
                condition_scale=bool(obj.get("condition_scale", base.condition_scale)),
            )
        except (TypeError, AttributeError) as e:
            raise ParseError(f"bad tolerance block: {e}") from e


# -------------------------
# Random test vectors
# -------------------------
def draw_indices(index_set: IndexSet, rng: np.random.Generator, count: int,
                 exclude: Iterable[int] = ()) -> List[int]:
    """Up to `count` distinct indices not in `exclude`."""
    excluded = set(exclude)
    if index_set.is_finite:
        pool = [i for i in range(1, index_set.size + 1) if i not in excluded]
    else:
        window = getattr(settings, "RANDOM_WINDOW", 16)
        pool = [i for i in range(-window, window + 1) if i != 0 and i not in excluded]
    if not pool or count <= 0:
        return []
    picks = rng.choice(len(pool), size=min(count, len(pool)), replace=False)
    return sorted(pool[k] for k in picks)


def complex_gaussian(rng: np.random.Generator, size: int) -> np.ndarray:
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2.0)


def random_vector(index_set: IndexSet, rng: np.random.Generator,
                  support: Optional[Sequence[int]] = None, size: Optional[int] = None) -> CoeffVector:
    """
    Standard complex Gaussian entries on `support`; when support is None a
    random support is drawn (over Z\\{0} from +-1..RANDOM_WINDOW).
    """
    if support is None:
        if size is None:
            limit = index_set.size if index_set.is_finite else 8
            size = int(rng.integers(1, limit + 1))
        support = draw_indices(index_set, rng, size)
    values = complex_gaussian(rng, len(support))
    return CoeffVector(index_set, tuple(zip(support, values)))


# -------------------------
# JSON codec
# -------------------------
def vector_to_json(f: CoeffVector) -> dict:
    return {
        "index_set": f.index_set.label,
        "entries": [{"i": i, "re": c.real, "im": c.imag} for i, c in f.entries],
    }


def vector_from_json(obj: dict) -> CoeffVector:
    if not isinstance(obj, dict) or "index_set" not in obj:
        raise ParseError("vector JSON needs an 'index_set' field")
    index_set = IndexSet.from_label(obj["index_set"])
    seen = set()
    entries = []
    for row in obj.get("entries", []):
        try:
            i = int(row["i"])
            c = complex(float(row.get("re", 0.0)), float(row.get("im", 0.0)))
        except (KeyError, TypeError, ValueError) as e:
            raise ParseError(f"bad vector entry {row!r}: {e}") from e
        if i in seen:
            raise ParseError(f"duplicate index {i} in vector JSON")
        seen.add(i)
        entries.append((i, c))
    try:
        return CoeffVector(index_set, tuple(entries))
    except GelfandError as e:
        raise ParseError(str(e)) from e


# -------------------------
# Check reports
# -------------------------
class ResidualTracker:
    """
    Keeps the worst residual seen by a property check together with a
    replayable counterexample (built lazily, only when the worst changes).
    """

    def __init__(self, name: str, tolerance: float):
        self.name = name
        self.tolerance = tolerance
        self.samples = 0
        self.max_residual = 0.0
        self.worst_case: Optional[dict] = None

    def update(self, residual: float, case: Callable[[], dict]) -> None:
        self.samples += 1
        if residual > self.max_residual or (math.isnan(residual) and not math.isnan(self.max_residual)):
            self.max_residual = residual
            self.worst_case = case()

    @property
    def ok(self) -> bool:
        return not math.isnan(self.max_residual) and self.max_residual <= self.tolerance

    def report(self, **extra) -> dict:
        out = {
            "name": self.name,
            "ok": self.ok,
            "samples": self.samples,
            "max_residual": self.max_residual,
            "tolerance": self.tolerance,
        }
        if not self.ok and self.worst_case is not None:
            out["counterexample"] = self.worst_case
        out.update(extra)
        return out


def residual_ratio(report: dict) -> float:
    """max_residual / tolerance; NaN residuals and any residual over a zero tolerance rank as inf."""
    residual, tolerance = report["max_residual"], report["tolerance"]
    if math.isnan(residual):
        return math.inf
    if tolerance <= 0:
        return math.inf if residual > 0 else 0.0
    return residual / tolerance


def merge_reports(name: str, parts: List[dict], **extra) -> dict:
    """
    Combine sub-check reports: ok iff all parts are ok. max_residual and
    tolerance are taken together from the worst part (largest
    residual/tolerance ratio, failing parts first), so a failed merge always
    shows a residual above its tolerance.
    """
    failing = [p for p in parts if not p["ok"]]
    worst = max(failing or parts, key=residual_ratio, default=None)
    out = {
        "name": name,
        "ok": not failing,
        "max_residual": worst["max_residual"] if worst else 0.0,
        "tolerance": worst["tolerance"] if worst else 0.0,
        "checks": {p["name"]: p for p in parts},
    }
    if worst is not None and not worst["ok"]:
        out["worst_check"] = worst["name"]
        if "counterexample" in worst:
            out["counterexample"] = dict(worst["counterexample"], check=worst["name"])
    out.update(extra)
    return out
