# gelfand/decomp.py
"""
Spectral decomposition of a quasi Gelfand triple into two ordinary triples.

The cut Delta lives on the spectrum of G^{1/2} (sqrt(lambda), not lambda) and
is a bounded finite union of half-open cells (a, b]. Boundary points belong
to the bounded side, so with the default cut (0, 1] an index with
sqrt(lambda) == 1 lands in component 2.

- component 1: sqrt(lambda) in Delta^c, where ||f||_+ dominates ||f||_0
- component 2: sqrt(lambda) in Delta,   where ||f||_0 dominates ||f||_+

Exposed functions:
- decompose, verify_decomposition, recompose, split_report
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Dict, List, Optional, Tuple

import numpy as np

from config import settings
from gelfand import gram as gram_ops
from gelfand.core import (
    CoeffVector,
    ResidualTracker,
    TolerancePolicy,
    merge_reports,
    pivot_inner,
    pivot_norm,
    random_vector,
    vector_to_json,
)
from gelfand.errors import ComponentLeak, IndexSetMismatch, InvalidInterval
from gelfand.gram import ANALYTIC, DENSE, CutSet, GramOperator, SpectralProjection
from gelfand.triple import QuasiTriple, minus_inner, minus_norm, plus_inner, plus_norm

logger = logging.getLogger("decomp")
logger.setLevel(logging.INFO)

SHARD_SAMPLES = 250  # samples per verification shard; fixed so results never depend on worker count

PLUS_DOMINATES = "plus_norm >= pivot_norm"
PIVOT_DOMINATES = "plus_norm <= pivot_norm"


# -------------------------
# Types
# -------------------------
@dataclass(frozen=True, eq=False)
class OrdinaryTriple:
    """
    One spectral component. `dimension` is None for infinite components,
    `basis` holds eigenvector columns (dense) or unit-vector indices (diagonal).
    `chain` names the ordinary triple the component carries.
    """
    side: int
    projection: SpectralProjection
    gram_restricted: Optional[GramOperator]
    embedding_constant: float
    direction: str
    chain: str
    dimension: Optional[int]
    description: str
    basis: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class SpectralSplit:
    gram: GramOperator
    cut: CutSet
    proj_bounded: SpectralProjection
    proj_unbounded: SpectralProjection
    component1: OrdinaryTriple
    component2: OrdinaryTriple

    @property
    def lower_bound(self) -> float:
        """inf of Delta^c: sqrt(lambda) on component 1 is at least this."""
        return self.cut.complement().intervals[0].lower

    @property
    def upper_bound(self) -> float:
        """sup of Delta: sqrt(lambda) on component 2 is at most this."""
        return self.cut.intervals[-1].upper


# -------------------------
# Component descriptions
# -------------------------
def _runs(indices: List[int]) -> List[Tuple[int, int]]:
    """Maximal runs of consecutive nonzero integers (-1 and 1 are neighbours)."""
    runs: List[Tuple[int, int]] = []
    for i in indices:
        if runs and (i == runs[-1][1] + 1 or (runs[-1][1] == -1 and i == 1)):
            runs[-1] = (runs[-1][0], i)
        else:
            runs.append((i, i))
    return runs


def _describe_analytic(proj: SpectralProjection) -> Tuple[Optional[int], str, List[int]]:
    window = getattr(settings, "DESCRIBE_WINDOW", 4096)
    members = [i for i in range(-window, window + 1) if i != 0 and proj.contains_index(i)]
    if not members:
        return 0, "empty", members
    infinite = False
    parts = []
    for a, b in _runs(members):
        low_open, high_open = a == -window, b == window
        infinite = infinite or low_open or high_open
        if low_open and high_open:
            parts.append("n != 0")
        elif low_open:
            parts.append(f"n <= {b}")
        elif high_open:
            parts.append(f"n >= {a}")
        elif a == b:
            parts.append(f"n = {a}")
        else:
            parts.append(f"{a} <= n <= {b}")
    return (None if infinite else len(members)), " or ".join(parts), members


def _component(G: GramOperator, proj: SpectralProjection, side: int) -> OrdinaryTriple:
    direction = PLUS_DOMINATES if side == 1 else PIVOT_DOMINATES
    chain = "X+ < X0 < X-" if side == 1 else "X- < X0 < X+"

    if G.kind == ANALYTIC:
        dimension, description, members = _describe_analytic(proj)
        roots = [G.sqrt_weight(i) for i in members]
        restricted = G if members else None
        basis = None
    elif G.kind == DENSE:
        mask = gram_ops.dense_cut_mask(G, proj.cut)
        roots = list(G.sqrt_spectrum()[mask])
        dimension = int(mask.sum())
        restricted = GramOperator.finite_diagonal(G.spectrum()[mask]) if dimension else None
        description = f"eigenvectors with sqrt(lambda) in {proj.cut.to_json()}"
        basis = proj.columns
    else:
        members = [i for i in G.index_set.indices() if proj.contains_index(i)]
        roots = [G.sqrt_weight(i) for i in members]
        dimension = len(members)
        restricted = GramOperator.finite_diagonal([G.lambdas[i - 1] for i in members]) if members else None
        description = f"indices {members}"
        basis = np.array(members, dtype=int)

    # operator norm of the continuous embedding on this component
    if not roots:
        constant = 0.0
    elif side == 1:
        constant = 1.0 / min(roots)
    else:
        constant = max(roots)
    return OrdinaryTriple(side, proj, restricted, float(constant), direction, chain,
                          dimension, description, basis)


# -------------------------
# Decomposition
# -------------------------
def decompose(T: QuasiTriple, cut=None) -> SpectralSplit:
    """
    Split X0 = ran E(Delta^c) + ran E(Delta) along the spectrum of G^{1/2}.
    `cut` may be a CutSet, an Interval, an (a, b) pair or a string like '0:1,2:3'.
    """
    if cut is None:
        cut = CutSet.default()
    elif isinstance(cut, str):
        cut = CutSet.parse(cut)
    else:
        cut = gram_ops.as_cut(cut)
    if cut.is_empty:
        raise InvalidInterval("the cut must be nonempty")
    if not cut.bounded:
        raise InvalidInterval(f"the cut {cut.to_json()} is unbounded; the bounded side must be bounded")

    G = T.gram
    bounded = gram_ops.spectral_projection(G, cut)
    unbounded = gram_ops.spectral_projection(G, cut.complement())
    split = SpectralSplit(G, cut, bounded, unbounded, _component(G, unbounded, 1), _component(G, bounded, 2))
    logger.info(f"decomposed {G.kind} operator at cut {cut.to_json()}: "
                f"dims ({split.component1.dimension}, {split.component2.dimension})")
    return split


def recompose(S: SpectralSplit, f1: CoeffVector, f2: CoeffVector) -> CoeffVector:
    """f1 + f2 for f1 in component 1 and f2 in component 2 (orthogonal in every norm)."""
    if f1.index_set != S.gram.index_set or f2.index_set != S.gram.index_set:
        raise IndexSetMismatch("recompose needs vectors over the operator's index set")
    tol = TolerancePolicy.from_settings().scaled(S.gram.condition_number())
    leak1 = pivot_norm(S.proj_bounded.apply(f1))
    leak2 = pivot_norm(S.proj_unbounded.apply(f2))
    if leak1 > tol * max(1.0, pivot_norm(f1)):
        raise ComponentLeak(f"f1 has mass {leak1:.3e} in component 2")
    if leak2 > tol * max(1.0, pivot_norm(f2)):
        raise ComponentLeak(f"f2 has mass {leak2:.3e} in component 1")
    return f1 + f2


# -------------------------
# Verification
# -------------------------
CHECK_NAMES = ("projection_algebra", "contraction", "orthogonality", "component_bounds", "cross_duality")


def _verify_shard(S: SpectralSplit, T: QuasiTriple, samples: int, seed_seq: np.random.SeedSequence) -> Dict[str, ResidualTracker]:
    rng = np.random.default_rng(seed_seq)
    tol = T.tol()
    trackers = {name: ResidualTracker(name, tol) for name in CHECK_NAMES}
    P, Q = S.proj_bounded, S.proj_unbounded
    lower, upper = S.lower_bound, S.upper_bound

    for _ in range(samples):
        f = random_vector(T.index_set, rng)
        g = random_vector(T.index_set, rng)
        case = lambda f=f, g=g: {"f": vector_to_json(f), "g": vector_to_json(g)}
        nf, ng = pivot_norm(f), pivot_norm(g)
        Pf, Qf, Pg, Qg = P.apply(f), Q.apply(f), P.apply(g), Q.apply(g)

        # (a) idempotent, complementary, annihilating, Hermitian
        algebra = max(
            pivot_norm(P.apply(Pf) - Pf) / nf,
            pivot_norm(Q.apply(Qf) - Qf) / nf,
            pivot_norm(Pf + Qf - f) / nf,
            pivot_norm(P.apply(Qf)) / nf,
            pivot_norm(Q.apply(Pf)) / nf,
            abs(pivot_inner(Pf, g) - pivot_inner(f, Pg)) / (nf * ng),
        )
        trackers["projection_algebra"].update(algebra, case)

        # (b) contractive in both outer norms
        pf, mf = plus_norm(T, f), minus_norm(T, f)
        contraction = max(
            max(0.0, plus_norm(T, Pf) - pf) / pf,
            max(0.0, plus_norm(T, Qf) - pf) / pf,
            max(0.0, minus_norm(T, Pf) - mf) / mf,
            max(0.0, minus_norm(T, Qf) - mf) / mf,
        )
        trackers["contraction"].update(contraction, case)

        # (c) the two parts are orthogonal in all three inner products
        pg, mg = plus_norm(T, g), minus_norm(T, g)
        orthogonality = max(
            abs(pivot_inner(Pf, Qg)) / (nf * ng),
            abs(plus_inner(T, Pf, Qg)) / (pf * pg),
            abs(minus_inner(T, Pf, Qg)) / (mf * mg),
        )
        trackers["orthogonality"].update(orthogonality, case)

        # (d) spectral bounds; constant 1 on both sides when the cut is (0, 1]
        bounds = max(
            max(0.0, lower * pivot_norm(Qf) - plus_norm(T, Qf)),
            max(0.0, plus_norm(T, Pf) - upper * pivot_norm(Pf)),
            max(0.0, pivot_norm(Pf) - upper * minus_norm(T, Pf)) / upper,
        )
        if lower > 0:
            bounds = max(bounds, max(0.0, minus_norm(T, Qf) - pivot_norm(Qf) / lower))
        trackers["component_bounds"].update(bounds / nf, case)

        # (e) <E(Delta)_+ f, E(Delta^c)_- g> vanishes and vice versa
        cross = max(abs(pivot_inner(Qg, Pf)), abs(pivot_inner(Pg, Qf))) / (pf * mg)
        trackers["cross_duality"].update(cross, case)
    return trackers


def _merge_trackers(shards: List[Dict[str, ResidualTracker]], tolerance: float) -> List[dict]:
    reports = []
    for name in CHECK_NAMES:
        merged = ResidualTracker(name, tolerance)
        for shard in shards:
            t = shard[name]
            merged.samples += t.samples
            if t.max_residual > merged.max_residual or (math.isnan(t.max_residual)
                                                        and not math.isnan(merged.max_residual)):
                merged.max_residual = t.max_residual
                merged.worst_case = t.worst_case
        reports.append(merged.report())
    return reports


def verify_decomposition(S: SpectralSplit, T: QuasiTriple, samples: int = None, seed: int = 0,
                         workers: int = None) -> dict:
    """
    Seeded check of the decomposition claims: projection algebra, contraction
    in ||.||_+ and ||.||_-, orthogonality in all three inner products, the
    component norm bounds and the cross-duality identities.
    Shards use SeedSequence children of `seed`; worker count never changes results.
    """
    if S.gram is not T.gram:
        raise IndexSetMismatch("split and triple come from different Gram operators")
    samples = getattr(settings, "DEFAULT_SAMPLES", 1000) if samples is None else samples
    workers = getattr(settings, "VERIFY_WORKERS", 1) if workers is None else workers
    n_shards = max(1, math.ceil(samples / SHARD_SAMPLES))
    sizes = [samples // n_shards + (1 if k < samples % n_shards else 0) for k in range(n_shards)]
    seeds = np.random.SeedSequence(seed).spawn(n_shards)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            shards = list(pool.map(lambda args: _verify_shard(S, T, *args), zip(sizes, seeds)))
    else:
        shards = [_verify_shard(S, T, size, seq) for size, seq in zip(sizes, seeds)]

    report = merge_reports("decomposition", _merge_trackers(shards, T.tol()),
                           cut=S.cut.to_json(), samples=samples, seed=seed)
    if not report["ok"]:
        logger.warning(f"decomposition check failed at cut {S.cut.to_json()}: "
                       f"max residual {report['max_residual']:.3e}")
    return report


def split_report(S: SpectralSplit, residuals: Optional[dict] = None) -> dict:
    """The JSON report of a split; infinite components report dimension 'infinite'."""
    def component(c: OrdinaryTriple) -> dict:
        return {
            "dimension": "infinite" if c.dimension is None else c.dimension,
            "description": c.description,
            "embedding_constant": c.embedding_constant,
            "direction": c.direction,
            "chain": c.chain,
        }

    return {
        "cut": S.cut.to_json(),
        "component1_dim": component(S.component1)["dimension"],
        "component2_dim": component(S.component2)["dimension"],
        "component1": component(S.component1),
        "component2": component(S.component2),
        "residuals": residuals or {},
    }
