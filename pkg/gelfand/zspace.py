# gelfand/zspace.py
"""
Intersection space Z+ = D+ cap D- and hull space Z- = X+ + X-.

Responsibilities:
- Z+ norm and inner product (sum of the + and - forms)
- Z- norm in closed form through Phi = (G + G^{-1})^{-1}, plus a brute-force dual-norm oracle
- canonical and optimal splittings of a Z- element into an X+ and an X- part
- intersection witnesses: X+ cap X- inside Z- is exactly Z+

Every spectral function used here is a scalar function of lambda applied
through gram.apply_function:

    Phi            lambda / (lambda^2 + 1)
    Psi Phi        1 / (lambda^2 + 1)          (canonical X+ part)
    Psi^{-1} Phi   lambda^2 / (lambda^2 + 1)   (canonical X- part)
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Union

import numpy as np

from config import settings
from gelfand.core import (
    CoeffVector,
    ResidualTracker,
    draw_indices,
    merge_reports,
    pivot_inner,
    pivot_norm,
    random_vector,
    vector_from_json,
    vector_to_json,
)
from gelfand.errors import EmptyVector, GelfandError, IndexSetMismatch, ParseError
from gelfand.gram import apply_function
from gelfand.triple import QuasiTriple, minus_inner, minus_norm, plus_inner, plus_norm

logger = logging.getLogger("zspace")
logger.setLevel(logging.INFO)

PLUS_SIDE = "plus"
MINUS_SIDE = "minus"


# -------------------------
# Spectral functions
# -------------------------
def _phi(lam):
    return lam / (lam * lam + 1.0)


def _plus_share(lam):
    return 1.0 / (lam * lam + 1.0)


def _minus_share(lam):
    return lam * lam / (lam * lam + 1.0)


# -------------------------
# Types
# -------------------------
@dataclass(frozen=True)
class ZPlusElement:
    vector: CoeffVector
    z_plus_norm: float


@dataclass(frozen=True)
class ZMinusElement:
    """h = plus_part + minus_part with plus_part in X+ and minus_part in X-."""
    plus_part: CoeffVector
    minus_part: CoeffVector

    def __post_init__(self):
        if self.plus_part.index_set != self.minus_part.index_set:
            raise IndexSetMismatch(
                f"parts over {self.plus_part.index_set.label} and {self.minus_part.index_set.label}")

    @classmethod
    def of_plus(cls, f: CoeffVector) -> "ZMinusElement":
        return cls(f, CoeffVector.zeros(f.index_set))

    @classmethod
    def of_minus(cls, g: CoeffVector) -> "ZMinusElement":
        return cls(CoeffVector.zeros(g.index_set), g)

    @property
    def total(self) -> CoeffVector:
        return self.plus_part + self.minus_part


@dataclass(frozen=True)
class IntersectionVerdict:
    """
    equal: the two embedded functionals agree on Z+.
    norm: finite norm of the common element in `space` (None when not equal).
    """
    equal: bool
    residual: float
    space: str
    norm: Optional[float] = None


def _check(T: QuasiTriple, *vectors: CoeffVector) -> None:
    for v in vectors:
        if v.index_set != T.index_set:
            raise IndexSetMismatch(f"vector over {v.index_set.label}, triple over {T.index_set.label}")


def _as_zminus(h: Union[ZMinusElement, CoeffVector]) -> ZMinusElement:
    return h if isinstance(h, ZMinusElement) else ZMinusElement.of_plus(h)


# -------------------------
# Z+
# -------------------------
def z_plus_inner(T: QuasiTriple, z1: CoeffVector, z2: CoeffVector) -> complex:
    return plus_inner(T, z1, z2) + minus_inner(T, z1, z2)


def z_plus_norm(T: QuasiTriple, z: CoeffVector) -> float:
    _check(T, z)
    return math.hypot(plus_norm(T, z), minus_norm(T, z))


def z_plus_element(T: QuasiTriple, z: CoeffVector) -> ZPlusElement:
    return ZPlusElement(z, z_plus_norm(T, z))


def phi(T: QuasiTriple, h: CoeffVector) -> CoeffVector:
    """Duality map Z- -> Z+, (G + G^{-1})^{-1} h."""
    _check(T, h)
    return apply_function(T.gram, h, _phi)


# -------------------------
# Z-
# -------------------------
def z_minus_norm(T: QuasiTriple, h: Union[ZMinusElement, CoeffVector]) -> float:
    """||(G + G^{-1})^{-1/2} (f + g)||_0; a bare CoeffVector is read as (h, 0)."""
    h = _as_zminus(h)
    _check(T, h.plus_part, h.minus_part)
    return pivot_norm(apply_function(T.gram, h.total, lambda lam: np.sqrt(_phi(lam))))


def z_minus_norm_oracle(T: QuasiTriple, h: Union[ZMinusElement, CoeffVector],
                        trials: int = None, seed: int = 0) -> float:
    """
    sup over probes z of |<f + g, z>_0| / ||z||_{Z+}. Probes are the analytic
    maximizer Phi(f + g) and `trials` seeded random vectors on the support
    of f + g plus up to 3 extra indices.
    """
    h = _as_zminus(h)
    _check(T, h.plus_part, h.minus_part)
    total = h.total
    if total.is_empty:
        raise EmptyVector("the Z- oracle needs a nonzero element")
    trials = getattr(settings, "DEFAULT_TRIALS", 1000) if trials is None else trials
    rng = np.random.default_rng(seed)

    def ratio(z: CoeffVector) -> float:
        denom = z_plus_norm(T, z)
        return abs(pivot_inner(total, z)) / denom if denom > 0 else 0.0

    best = ratio(phi(T, total))
    for _ in range(trials):
        extra = draw_indices(T.index_set, rng, int(rng.integers(0, 4)), exclude=total.support)
        best = max(best, ratio(random_vector(T.index_set, rng, support=sorted(total.support + tuple(extra)))))
    return best


def canonical_split(T: QuasiTriple, h: CoeffVector) -> ZMinusElement:
    """h = Psi Phi h + Psi^{-1} Phi h, the split realizing ||h||_{Z-} as a Pythagorean sum."""
    _check(T, h)
    return ZMinusElement(apply_function(T.gram, h, _plus_share), apply_function(T.gram, h, _minus_share))


def split_objective(T: QuasiTriple, f: CoeffVector, g: CoeffVector, z: CoeffVector) -> float:
    """sqrt(||f + z||_+^2 + ||g - z||_-^2)."""
    _check(T, f, g, z)
    return math.hypot(plus_norm(T, f + z), minus_norm(T, g - z))


def optimal_split(T: QuasiTriple, f: CoeffVector, g: CoeffVector):
    """
    Minimizer z* of ||f + z||_+^2 + ||g - z||_-^2 over Z+ and the attained value.

    The normal equations (G + G^{-1}) z = G^{-1} g - G f are solved in the
    spectral calculus: z* = (g - G^2 f) / (G^2 + 1).
    """
    _check(T, f, g)
    z = apply_function(T.gram, g, _plus_share) - apply_function(T.gram, f, _minus_share)
    return z, split_objective(T, f, g, z)


def z_minus_equal(T: QuasiTriple, h1: ZMinusElement, h2: ZMinusElement) -> bool:
    """Quotient equality: both elements have the same canonical split."""
    _check(T, h1.plus_part, h2.plus_part)
    s1, s2 = canonical_split(T, h1.total), canonical_split(T, h2.total)
    gap = pivot_norm(s1.plus_part - s2.plus_part) + pivot_norm(s1.minus_part - s2.minus_part)
    return gap <= T.tol() * max(1.0, pivot_norm(h1.total), pivot_norm(h2.total))


# -------------------------
# Intersection witnesses
# -------------------------
def intersection_witness(T: QuasiTriple, f: CoeffVector, g: CoeffVector) -> IntersectionVerdict:
    """
    Do psi_{X+}(f) and psi_{X-}(g) agree as functionals on Z+? Both act as
    z -> <., z>_0, and the unit vectors lie in Z+, so they agree exactly when
    the coefficients agree. The common element then has a finite Z+ norm.
    """
    _check(T, f, g)
    diff = f - g
    if diff.is_empty:
        return IntersectionVerdict(True, 0.0, "z_plus", z_plus_norm(T, f))
    return IntersectionVerdict(False, float(np.max(np.abs(diff.coefficients))), "z_plus")


def pivot_intersection_witness(T: QuasiTriple, x: CoeffVector, side: str = PLUS_SIDE) -> IntersectionVerdict:
    """X0 cap X+ (or X0 cap X-) inside Z- is D+ (or D-): report the finite norm on that side."""
    _check(T, x)
    if side == PLUS_SIDE:
        norm = plus_norm(T, x)
    elif side == MINUS_SIDE:
        norm = minus_norm(T, x)
    else:
        raise GelfandError(f"side must be {PLUS_SIDE!r} or {MINUS_SIDE!r}, got {side!r}")
    return IntersectionVerdict(math.isfinite(norm), 0.0, f"d_{side}", norm)


# -------------------------
# Property checks
# -------------------------
def check_zspace(T: QuasiTriple, samples: int = None, seed: int = 0, probes: int = 4,
                 oracle_vectors: int = None, trials: int = None) -> dict:
    """
    Combined Z+/Z- report:
    pythagoras, representation, infimum, embedding, oracle, intersection.
    """
    samples = getattr(settings, "DEFAULT_SAMPLES", 1000) if samples is None else samples
    trials = getattr(settings, "DEFAULT_TRIALS", 1000) if trials is None else trials
    if oracle_vectors is None:
        oracle_vectors = max(1, min(20, samples // 50))
    rng = np.random.default_rng(seed)
    tol = T.tol()

    pythagoras = ResidualTracker("pythagoras", tol)
    representation = ResidualTracker("representation", tol)
    infimum = ResidualTracker("infimum", T.tolerance.oracle_tol)
    embedding = ResidualTracker("embedding", tol)
    oracle = ResidualTracker("z_minus_oracle", T.tolerance.oracle_tol)
    intersection = ResidualTracker("intersection", 0.0)

    for k in range(samples):
        h = random_vector(T.index_set, rng)
        case = lambda h=h: {"h": vector_to_json(h)}
        closed = z_minus_norm(T, h)

        split = canonical_split(T, h)
        pyth = math.hypot(plus_norm(T, split.plus_part), minus_norm(T, split.minus_part))
        pythagoras.update(abs(closed - pyth) / max(closed, 1e-300), case)

        spread = max(abs(closed - z_minus_norm(T, ZMinusElement.of_minus(h))),
                     abs(closed - z_minus_norm(T, split)))
        representation.update(spread / max(closed, 1e-300), case)

        # split h randomly into f + g, then probe around the minimizer
        f = random_vector(T.index_set, rng, support=h.support)
        g = h - f
        z_star, value = optimal_split(T, f, g)
        worst = abs(value - closed) / max(1.0, closed)
        for _ in range(probes):
            probe = z_star + random_vector(T.index_set, rng) * float(10 ** rng.uniform(-3, 0))
            worst = max(worst, max(0.0, value - split_objective(T, f, g, probe)) / max(1.0, value))
        infimum.update(worst, lambda f=f, g=g: {"f": vector_to_json(f), "g": vector_to_json(g)})

        n0 = pivot_norm(h)
        embed = max(0.0, n0 - z_plus_norm(T, h), closed - n0) / n0
        embedding.update(embed, case)

        if k < oracle_vectors:
            value_oracle = z_minus_norm_oracle(T, h, trials, seed=int(rng.integers(0, 2**31)))
            oracle.update(abs(value_oracle - closed) / max(1.0, closed), case)

        if k % 2 == 0:
            other = h
        else:
            i = h.support[int(rng.integers(0, len(h)))]
            other = h + CoeffVector.basis(T.index_set, i, complex(rng.choice([1.0, -0.5, 1j])))
        verdict = intersection_witness(T, h, other)
        misclassified = verdict.equal != (other == h)
        intersection.update(1.0 if misclassified else 0.0,
                            lambda h=h, o=other: {"f": vector_to_json(h), "g": vector_to_json(o)})

    report = merge_reports("zspace", [pythagoras.report(), representation.report(), infimum.report(),
                                      embedding.report(), oracle.report(trials=trials), intersection.report()])
    logger.debug(f"zspace check ok={report['ok']} max_residual={report['max_residual']:.3e}")
    return report


# -------------------------
# JSON codec
# -------------------------
def zminus_to_json(h: ZMinusElement) -> dict:
    return {"plus_part": vector_to_json(h.plus_part), "minus_part": vector_to_json(h.minus_part)}


def zminus_from_json(obj: dict) -> ZMinusElement:
    if not isinstance(obj, dict) or "plus_part" not in obj or "minus_part" not in obj:
        raise ParseError("Z- element JSON needs 'plus_part' and 'minus_part'")
    return ZMinusElement(vector_from_json(obj["plus_part"]), vector_from_json(obj["minus_part"]))
