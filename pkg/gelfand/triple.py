# gelfand/triple.py
"""
Quasi Gelfand triple engine.

A QuasiTriple is a validated Gram operator plus a tolerance policy. The
embeddings iota_+ and iota_- are the identity on finite-support
representatives (dom and ran are identified), so every question about the
triple becomes a norm computation through G:

    ||f||_+ = ||G^{1/2} f||_0        ||g||_- = ||G^{-1/2} g||_0
    <g, f>_{X-,X+} = <g, f>_0        Psi = G^{-1} : X- -> X+

Exposed functions:
- plus_norm, minus_norm, minus_norm_oracle, plus_inner, minus_inner, membership
- pairing, duality_map_psi, pivot_split, recover_gram, density_approximation
- check_* report functions used by the verification suites
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from config import settings
from gelfand import gram as gram_ops
from gelfand.core import (
    CoeffVector,
    IndexSet,
    ResidualTracker,
    TolerancePolicy,
    draw_indices,
    merge_reports,
    pivot_inner,
    pivot_norm,
    random_vector,
    vector_to_json,
)
from gelfand.errors import EmptyVector, GelfandError, IndexSetMismatch, NotSelfAdjoint, ParseError
from gelfand.gram import GramOperator, apply_function, gram_apply, validate_gram

logger = logging.getLogger("triple")
logger.setLevel(logging.INFO)

FORWARD = "forward"  # X- -> X+
INVERSE = "inverse"  # X+ -> X-


# -------------------------
# Types
# -------------------------
@dataclass(frozen=True, eq=False)
class QuasiTriple:
    gram: GramOperator
    tolerance: TolerancePolicy = field(default_factory=TolerancePolicy.from_settings)
    validation: dict = field(init=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "validation", validate_gram(self.gram, self.tolerance))

    @property
    def index_set(self) -> IndexSet:
        return self.gram.index_set

    @property
    def kappa(self) -> float:
        return self.gram.condition_number()

    def tol(self) -> float:
        """Algebraic tolerance, scaled by kappa(G) when the policy asks for it."""
        return self.tolerance.scaled(self.kappa)


@dataclass(frozen=True)
class MembershipVerdict:
    in_d_plus: bool
    in_d_minus: bool
    plus_norm: float
    minus_norm: float


def _check(T: QuasiTriple, *vectors: CoeffVector) -> None:
    for v in vectors:
        if v.index_set != T.index_set:
            raise IndexSetMismatch(f"vector over {v.index_set.label}, triple over {T.index_set.label}")


# -------------------------
# Norms and forms
# -------------------------
def plus_norm(T: QuasiTriple, f: CoeffVector) -> float:
    _check(T, f)
    return pivot_norm(gram_apply(T.gram, f, 0.5))


def minus_norm(T: QuasiTriple, g: CoeffVector) -> float:
    """Closed form of sup_f |<g,f>_0| / ||f||_+ ."""
    _check(T, g)
    return pivot_norm(gram_apply(T.gram, g, -0.5))


def plus_inner(T: QuasiTriple, f: CoeffVector, g: CoeffVector) -> complex:
    _check(T, f, g)
    return pivot_inner(gram_apply(T.gram, f, 0.5), gram_apply(T.gram, g, 0.5))


def minus_inner(T: QuasiTriple, f: CoeffVector, g: CoeffVector) -> complex:
    _check(T, f, g)
    return pivot_inner(gram_apply(T.gram, f, -0.5), gram_apply(T.gram, g, -0.5))


def membership(T: QuasiTriple, f: CoeffVector) -> MembershipVerdict:
    p, m = plus_norm(T, f), minus_norm(T, f)
    return MembershipVerdict(math.isfinite(p), math.isfinite(m), p, m)


def pairing(T: QuasiTriple, g: CoeffVector, f: CoeffVector) -> complex:
    """<g, f>_{X-,X+}; on representatives it is the pivot inner product."""
    _check(T, g, f)
    return pivot_inner(g, f)


def duality_map_psi(T: QuasiTriple, v: CoeffVector, direction: str = FORWARD) -> CoeffVector:
    """Psi g = G^{-1} g (forward) or Psi^{-1} f = G f (inverse)."""
    _check(T, v)
    if direction == FORWARD:
        return gram_apply(T.gram, v, -1.0)
    if direction == INVERSE:
        return gram_apply(T.gram, v, 1.0)
    raise GelfandError(f"direction must be {FORWARD!r} or {INVERSE!r}, got {direction!r}")


def minus_norm_oracle(T: QuasiTriple, g: CoeffVector, trials: int = None, seed: int = 0) -> float:
    """
    Brute-force sup of |<g,f>_0| / ||f||_+ over the analytic maximizer G^{-1} g
    and `trials` seeded random f supported on supp(g) plus up to 3 extra indices.
    """
    _check(T, g)
    if g.is_empty:
        raise EmptyVector("the dual-norm oracle needs a nonzero vector")
    trials = getattr(settings, "DEFAULT_TRIALS", 1000) if trials is None else trials
    rng = np.random.default_rng(seed)

    def ratio(f: CoeffVector) -> float:
        denom = plus_norm(T, f)
        return abs(pivot_inner(g, f)) / denom if denom > 0 else 0.0

    best = ratio(gram_apply(T.gram, g, -1.0))
    for _ in range(trials):
        extra = draw_indices(T.index_set, rng, int(rng.integers(0, 4)), exclude=g.support)
        best = max(best, ratio(random_vector(T.index_set, rng, support=sorted(g.support + tuple(extra)))))
    return best


def pivot_split(T: QuasiTriple, x: CoeffVector) -> Tuple[CoeffVector, CoeffVector]:
    """
    x = f + g with g = (I + G^{-1})^{-1} x in D- and f = G^{-1} g in D+.
    f is taken as x - g so the two parts share the support of x.
    """
    _check(T, x)
    g = apply_function(T.gram, x, lambda lam: lam / (1.0 + lam))
    return x - g, g


def recover_gram(plus_form: Callable[[CoeffVector, CoeffVector], complex], dim: int,
                 tolerance: Optional[TolerancePolicy] = None) -> GramOperator:
    """
    Triple -> Gram direction: assemble G with <G f, g>_0 = plus_form(f, g) on
    the standard basis, i.e. G[i, j] = plus_form(e_j, e_i).
    """
    tolerance = tolerance or TolerancePolicy.from_settings()
    index_set = IndexSet.finite(dim)
    basis = [CoeffVector.basis(index_set, i) for i in index_set.indices()]
    m = np.array([[plus_form(basis[j], basis[i]) for j in range(dim)] for i in range(dim)], dtype=complex)
    scale = max(float(np.max(np.abs(m))), 1e-300)
    residual = float(np.max(np.abs(m - m.conj().T))) / scale
    if residual > tolerance.algebraic_tol:
        raise NotSelfAdjoint(f"plus form is not Hermitian: residual {residual:.3e}")
    G = GramOperator.dense(0.5 * (m + m.conj().T))
    validate_gram(G, tolerance)
    return G


def density_approximation(T: QuasiTriple, x: CoeffVector,
                          levels: Sequence[float] = (2, 4, 8, 16, 32)) -> List[float]:
    """
    ||x - E((1/k, k]) x||_0 for each level k > 1. The truncations have
    bounded spectrum on both sides, so they lie in D+ cap D-, and they
    approach x in X0; for increasing levels the errors never increase.
    """
    _check(T, x)
    errors = []
    for k in levels:
        if k <= 1:
            raise GelfandError(f"truncation level must exceed 1, got {k}")
        proj = gram_ops.spectral_projection(T.gram, gram_ops.CutSet.of((1.0 / k, float(k))))
        errors.append(pivot_norm(x - proj.apply(x)))
    return errors


# -------------------------
# Property checks
# -------------------------
def _pair_case(g: CoeffVector, f: CoeffVector) -> Callable[[], dict]:
    return lambda: {"g": vector_to_json(g), "f": vector_to_json(f)}


def check_pairing_identity(T: QuasiTriple, samples: int = None, seed: int = 0) -> dict:
    """
    |pairing(g,f) - <g,f>_0| and |pairing(g,f) - <Psi g, f>_+| on seeded random
    pairs; residuals relative to ||g||_0 ||f||_0.
    """
    samples = getattr(settings, "DEFAULT_SAMPLES", 1000) if samples is None else samples
    rng = np.random.default_rng(seed)
    pivot = ResidualTracker("pairing_vs_pivot", T.tolerance.algebraic_tol)
    riesz = ResidualTracker("pairing_vs_psi", T.tol())
    for _ in range(samples):
        g = random_vector(T.index_set, rng)
        f = random_vector(T.index_set, rng)
        scale = pivot_norm(g) * pivot_norm(f)
        value = pairing(T, g, f)
        pivot.update(abs(value - pivot_inner(g, f)) / scale, _pair_case(g, f))
        via_psi = plus_inner(T, duality_map_psi(T, g, FORWARD), f)
        riesz.update(abs(value - via_psi) / scale, _pair_case(g, f))
    return merge_reports("pairing", [pivot.report(), riesz.report()])


def check_minus_norm_oracle(T: QuasiTriple, vectors: int = 20, trials: int = None, seed: int = 0) -> dict:
    """Oracle never exceeds the closed form and meets it at the analytic maximizer."""
    trials = getattr(settings, "DEFAULT_TRIALS", 1000) if trials is None else trials
    rng = np.random.default_rng(seed)
    tracker = ResidualTracker("minus_norm_oracle", T.tolerance.oracle_tol)
    for k in range(vectors):
        g = random_vector(T.index_set, rng)
        closed = minus_norm(T, g)
        oracle = minus_norm_oracle(T, g, trials, seed=int(rng.integers(0, 2**31)))
        # overshoot beyond rounding counts as a violation as well as a gap
        residual = max(abs(closed - oracle), oracle - closed) / max(1.0, closed)
        tracker.update(residual, lambda g=g, c=closed, o=oracle: {"g": vector_to_json(g), "closed": c, "oracle": o})
    return tracker.report(trials=trials)


def check_inverse_gram_norms(T: QuasiTriple, samples: int = None, seed: int = 0) -> dict:
    """||g||_- under G equals ||g||_+ under G^{-1}."""
    samples = getattr(settings, "DEFAULT_SAMPLES", 1000) if samples is None else samples
    rng = np.random.default_rng(seed)
    swapped = QuasiTriple(gram_ops.inverse_gram(T.gram), T.tolerance)
    tracker = ResidualTracker("inverse_gram_norms", T.tol())
    for _ in range(samples):
        g = random_vector(T.index_set, rng)
        a, b = minus_norm(T, g), plus_norm(swapped, g)
        tracker.update(abs(a - b) / max(a, 1e-300), lambda g=g: {"g": vector_to_json(g)})
    return tracker.report()


def check_pivot_split(T: QuasiTriple, samples: int = None, seed: int = 0) -> dict:
    """f + g reproduces x on its support; f = G^{-1} g; both norms finite."""
    samples = getattr(settings, "DEFAULT_SAMPLES", 1000) if samples is None else samples
    rng = np.random.default_rng(seed)
    exact = ResidualTracker("pivot_split_sum", T.tolerance.algebraic_tol)
    relation = ResidualTracker("pivot_split_psi", T.tol())
    for _ in range(samples):
        x = random_vector(T.index_set, rng)
        f, g = pivot_split(T, x)
        total = f + g
        case = lambda x=x: {"x": vector_to_json(x)}
        if set(total.support) != set(x.support):
            exact.update(math.inf, case)
        else:
            exact.update(pivot_norm(total - x) / pivot_norm(x), case)
        finite = math.isfinite(plus_norm(T, f)) and math.isfinite(minus_norm(T, g))
        gap = pivot_norm(f - gram_apply(T.gram, g, -1.0)) / pivot_norm(x)
        relation.update(gap if finite else math.inf, case)
    return merge_reports("pivot_split", [exact.report(), relation.report()])


def check_interpolation(T: QuasiTriple, samples: int = None, seed: int = 0) -> dict:
    """||f||_0^2 <= ||f||_+ ||f||_- on random vectors (violation measured relatively)."""
    samples = getattr(settings, "DEFAULT_SAMPLES", 1000) if samples is None else samples
    rng = np.random.default_rng(seed)
    tracker = ResidualTracker("interpolation", T.tol())
    for _ in range(samples):
        f = random_vector(T.index_set, rng)
        lhs = pivot_norm(f) ** 2
        rhs = plus_norm(T, f) * minus_norm(T, f)
        tracker.update(max(0.0, lhs - rhs) / lhs, lambda f=f: {"f": vector_to_json(f)})
    return tracker.report()


def check_gram_roundtrip(count: int = 20, seed: int = 0, dims: Tuple[int, int] = (2, 16),
                         max_condition: float = 1e4, tolerance: Optional[TolerancePolicy] = None) -> dict:
    """recover_gram(plus form of G) == G entrywise for random dense SPD G."""
    tolerance = tolerance or TolerancePolicy.from_settings()
    rng = np.random.default_rng(seed)
    # residuals are divided by kappa, so each instance meets algebraic_tol * kappa
    tracker = ResidualTracker("gram_roundtrip", tolerance.algebraic_tol)
    for _ in range(count):
        dim = int(rng.integers(dims[0], dims[1] + 1))
        condition = float(10 ** rng.uniform(0.0, math.log10(max_condition)))
        a = gram_ops.random_spd_matrix(dim, condition, rng)
        T = QuasiTriple(GramOperator.dense(a), tolerance)
        recovered = recover_gram(lambda f, g: plus_inner(T, f, g), dim, tolerance)
        residual = float(np.max(np.abs(recovered.matrix - a))) / float(np.max(np.abs(a)))
        tracker.update(residual / max(1.0, T.kappa),
                       lambda a=a: {"matrix": [[[z.real, z.imag] for z in row] for row in a]})
    return tracker.report(count=count)


# -------------------------
# JSON codec
# -------------------------
def triple_to_json(T: QuasiTriple) -> dict:
    return {"gram": gram_ops.gram_to_json(T.gram), "tolerance": T.tolerance.to_json()}


def triple_from_json(obj: dict) -> QuasiTriple:
    if not isinstance(obj, dict) or "gram" not in obj:
        raise ParseError("triple JSON needs a 'gram' field")
    return QuasiTriple(gram_ops.gram_from_json(obj["gram"]), TolerancePolicy.from_json(obj.get("tolerance")))
