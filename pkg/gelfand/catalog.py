# gelfand/catalog.py
"""
Ready-made triples and test-instance generators.

Named instances (see list_instances):
- identity-3         G = I on C^3; every norm coincides
- diag-4-1-quarter   G = diag(4, 1, 1/4); one coordinate on each side of the cut
- paper-ell2         weighted l2 over Z\\{0}, w(n) = n^2 and w(-n) = 1/n^2
- random-spd-6       dense SPD, dim 6, condition 100, seed 0

Also the unboundedness demo (cauchy_demo) and the discretized
(L^p, L^2, L^q) triple with its Hoelder checks.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from config import settings
from gelfand.core import (
    CoeffVector,
    GridFunction,
    IndexSet,
    ResidualTracker,
    TolerancePolicy,
    complex_gaussian,
    merge_reports,
    pivot_norm,
)
from gelfand.errors import ConfigError, IndexSetMismatch, InvalidExponent, InvalidRange
from gelfand.gram import (
    PAPER_ELL2,
    GramOperator,
    WeightSpec,
    inverse_square_sum,
    inverse_square_tail,
    inverse_square_tail_bound,
    random_spd_matrix,
)
from gelfand.triple import QuasiTriple, check_pairing_identity, density_approximation, minus_norm, plus_norm

logger = logging.getLogger("catalog")
logger.setLevel(logging.INFO)

HOLDER_EXPONENTS = (4.0 / 3.0, 2.0, 3.0)
HOLDER_GRIDS = (8, 64)


# -------------------------
# Instances
# -------------------------
@dataclass(frozen=True, eq=False)
class TripleInstance:
    name: str
    triple: QuasiTriple
    notes: str


def ell2_two_sided_triple(tolerance: Optional[TolerancePolicy] = None) -> TripleInstance:
    """Weighted l2(Z\\{0}): ||x||_+^2 = sum n^2 |x_n|^2 + (1/n^2) |x_-n|^2."""
    T = QuasiTriple(GramOperator.analytic(WeightSpec(PAPER_ELL2)), tolerance or TolerancePolicy.from_settings())
    return TripleInstance(
        "paper-ell2", T,
        "weighted l2 over Z\\{0} with w(n)=n^2, w(-n)=1/n^2; the unit vectors are an orthonormal "
        "basis of X0 inside D+ cap D-, and neither embedding into X0 is continuous",
    )


def identity_triple(n: int = 3, tolerance: Optional[TolerancePolicy] = None) -> TripleInstance:
    T = QuasiTriple(GramOperator.identity(n), tolerance or TolerancePolicy.from_settings())
    return TripleInstance(f"identity-{n}", T, f"G = I on C^{n}: X+ = X0 = X- isometrically")


def diagonal_triple(lambdas: Sequence[float], name: Optional[str] = None,
                    tolerance: Optional[TolerancePolicy] = None) -> TripleInstance:
    T = QuasiTriple(GramOperator.finite_diagonal(lambdas), tolerance or TolerancePolicy.from_settings())
    label = name or "diag-" + "-".join(f"{x:g}" for x in lambdas)
    return TripleInstance(label, T, f"finite diagonal Gram operator, lambdas {list(map(float, lambdas))}")


def random_spd_triple(dim: int, condition: float = 100.0, seed: int = 0,
                      tolerance: Optional[TolerancePolicy] = None) -> TripleInstance:
    """Dense SPD Gram with spectrum spanning [1, condition] exactly; same seed, same matrix."""
    a = random_spd_matrix(dim, condition, np.random.default_rng(seed))
    T = QuasiTriple(GramOperator.dense(a), tolerance or TolerancePolicy.from_settings())
    return TripleInstance(f"random-spd-{dim}", T,
                          f"dense SPD, dim {dim}, condition {condition:g}, seed {seed}, log-uniform spectrum")


_REGISTRY: Dict[str, Callable[[Optional[TolerancePolicy]], TripleInstance]] = {
    "identity-3": lambda tol: identity_triple(3, tol),
    "diag-4-1-quarter": lambda tol: diagonal_triple([4.0, 1.0, 0.25], "diag-4-1-quarter", tol),
    "paper-ell2": lambda tol: ell2_two_sided_triple(tol),
    "random-spd-6": lambda tol: random_spd_triple(6, 100.0, 0, tol),
}


def get_instance(name: str, tolerance: Optional[TolerancePolicy] = None) -> TripleInstance:
    factory = _REGISTRY.get(name)
    if factory is None:
        raise ConfigError(f"unknown catalog instance {name!r}; known: {sorted(_REGISTRY)}")
    inst = factory(tolerance)
    # checked under the settings tolerance; a caller policy only governs later suites
    baseline = inst if tolerance is None else factory(None)
    report = check_instance(baseline, getattr(settings, "INSTANCE_CHECK_SAMPLES", 50))
    if not report["ok"]:
        raise ConfigError(f"catalog instance {name!r} fails the pairing identity: "
                          f"max residual {report['max_residual']:.3e} > {report['tolerance']:.1e}")
    return inst


def list_instances() -> List[dict]:
    out = []
    for name in _REGISTRY:
        inst = get_instance(name)
        out.append({
            "name": name,
            "kind": inst.triple.gram.kind,
            "index_set": inst.triple.index_set.label,
            "condition": inst.triple.kappa,
            "notes": inst.notes,
        })
    return out


def check_instance(inst: TripleInstance, samples: int = 100, seed: int = 0) -> dict:
    """Pairing identity on a freshly built instance (validation already ran in QuasiTriple)."""
    return check_pairing_identity(inst.triple, samples, seed)


# -------------------------
# Unboundedness demo
# -------------------------
def cauchy_demo(m: int, n: int) -> Tuple[float, float]:
    """
    Norms of sum_{i=m}^{n} e_{-i} in the two-sided weighted l2:
    ||.||_+ = sqrt(sum 1/i^2) stays below sqrt(1/(m-1)) while ||.||_0 = sqrt(n-m+1).
    The partial sums are Cauchy in ||.||_+ but not in ||.||_0.
    """
    if m < 1 or m > n:
        raise InvalidRange(f"need 1 <= m <= n, got m={m}, n={n}")
    return math.sqrt(inverse_square_sum(m, n)), math.sqrt(n - m + 1)


def cauchy_partial_sum(m: int, n: int) -> CoeffVector:
    """The vector sum_{i=m}^{n} e_{-i} itself (for modest ranges)."""
    if m < 1 or m > n:
        raise InvalidRange(f"need 1 <= m <= n, got m={m}, n={n}")
    return CoeffVector(IndexSet.symmetric(), tuple((-i, 1.0) for i in range(m, n + 1)))


def cauchy_tail(m: int) -> Tuple[float, float]:
    """(sup over n of the plus increment from m, its integral bound sqrt(1/(m-1)))."""
    return math.sqrt(inverse_square_tail(m)), math.sqrt(inverse_square_tail_bound(m))


# -------------------------
# Discretized L^p / L^2 / L^q
# -------------------------
ArrayLike = Union[GridFunction, Sequence[complex], np.ndarray]


@dataclass(frozen=True)
class LpDiscreteTriple:
    """
    Midpoint grid on [0, 1] with n cells of weight 1/n. X+ carries the p-norm,
    X- the conjugate q-norm, X0 the 2-norm; the pairing is the weighted L2 form.
    Finite grids give an ordinary (continuously embedded) triple, so the
    instance exercises Hoelder duality, never unboundedness.
    """
    p: float
    q: float
    grid_size: int

    def __post_init__(self):
        if abs(1.0 / self.p + 1.0 / self.q - 1.0) > 1e-15:
            raise InvalidExponent(f"exponents {self.p}, {self.q} are not conjugate")
        if self.grid_size < 1:
            raise InvalidRange(f"grid size must be positive, got {self.grid_size}")

    @property
    def cell_weight(self) -> float:
        return 1.0 / self.grid_size

    def sample(self, fn: Callable[[np.ndarray], np.ndarray]) -> GridFunction:
        points = (np.arange(self.grid_size) + 0.5) / self.grid_size
        return GridFunction(self.grid_size, fn(points), self.cell_weight)

    def _values(self, x: ArrayLike) -> np.ndarray:
        if isinstance(x, GridFunction):
            if x.grid_size != self.grid_size:
                raise IndexSetMismatch(f"grid of size {x.grid_size}, triple of size {self.grid_size}")
            return x.values
        values = np.asarray(x, dtype=complex).reshape(-1)
        if values.shape[0] != self.grid_size:
            raise IndexSetMismatch(f"{values.shape[0]} samples for a grid of size {self.grid_size}")
        return values

    def _norm(self, x: ArrayLike, r: float) -> float:
        a = np.abs(self._values(x))
        return float(np.sum(self.cell_weight * a ** r) ** (1.0 / r))

    def plus_norm(self, f: ArrayLike) -> float:
        return self._norm(f, self.p)

    def minus_norm(self, g: ArrayLike) -> float:
        return self._norm(g, self.q)

    def pivot_norm(self, f: ArrayLike) -> float:
        return self._norm(f, 2.0)

    def pairing(self, g: ArrayLike, f: ArrayLike) -> complex:
        return complex(np.sum(self.cell_weight * self._values(g) * np.conj(self._values(f))))

    def equality_partner(self, f: ArrayLike) -> np.ndarray:
        """g = |f|^{p-1} phase(f): Hoelder holds with equality for (f, g)."""
        v = self._values(f)
        a = np.abs(v)
        phase = np.where(a > 0, v / np.where(a > 0, a, 1.0), 0.0)
        return a ** (self.p - 1.0) * phase

    def holder_check(self, f: ArrayLike, g: ArrayLike, tol: float = 1e-12) -> dict:
        lhs = abs(self.pairing(g, f))
        rhs = self.minus_norm(g) * self.plus_norm(f)
        return {
            "ok": lhs <= rhs * (1.0 + tol),
            "pairing_abs": lhs,
            "bound": rhs,
            "ratio": lhs / rhs if rhs > 0 else 0.0,
        }

    def dual_norm_oracle(self, g: ArrayLike, trials: int = None, seed: int = 0) -> float:
        """sup_f |pairing(g, f)| / ||f||_p over the maximizer |g|^{q-1} phase(g) and random f."""
        trials = getattr(settings, "DEFAULT_TRIALS", 1000) if trials is None else trials
        v = self._values(g)
        rng = np.random.default_rng(seed)
        a = np.abs(v)
        maximizer = a ** (self.q - 1.0) * np.where(a > 0, v / np.where(a > 0, a, 1.0), 0.0)
        candidates = [maximizer] + [complex_gaussian(rng, self.grid_size) for _ in range(trials)]
        best = 0.0
        for f in candidates:
            denom = self.plus_norm(f)
            if denom > 0:
                best = max(best, abs(self.pairing(v, f)) / denom)
        return best

    def check_holder(self, samples: int = None, seed: int = 0, tol: float = 1e-12) -> dict:
        """Random pairs never break Hoelder; equality partners reach ratio 1."""
        samples = getattr(settings, "DEFAULT_SAMPLES", 1000) if samples is None else samples
        rng = np.random.default_rng(seed)
        holder = ResidualTracker("holder", tol)
        equality = ResidualTracker("holder_equality", tol)
        for _ in range(samples):
            f = complex_gaussian(rng, self.grid_size) * rng.exponential(1.0, self.grid_size)
            g = complex_gaussian(rng, self.grid_size)
            case = lambda f=f, g=g: {"p": self.p, "f": [[z.real, z.imag] for z in f],
                                     "g": [[z.real, z.imag] for z in g]}
            result = self.holder_check(f, g)
            holder.update(max(0.0, result["ratio"] - 1.0), case)
            partner = self.holder_check(f, self.equality_partner(f))
            equality.update(abs(partner["ratio"] - 1.0), case)
        return merge_reports(f"holder_p{self.p:g}_n{self.grid_size}", [holder.report(), equality.report()])


def lp_discrete_triple(p: float, n: int) -> LpDiscreteTriple:
    if not (isinstance(p, (int, float)) and math.isfinite(p) and p > 1):
        raise InvalidExponent(f"p must lie in (1, inf), got {p}")
    if n < 1:
        raise InvalidRange(f"grid size must be positive, got {n}")
    q = p / (p - 1.0)
    return LpDiscreteTriple(float(p), q, int(n))


# -------------------------
# Demo report
# -------------------------
def check_catalog_demos(samples: int = None, seed: int = 0) -> dict:
    """
    Cauchy demo values and tail bounds, diagonal reciprocity of the two-sided
    weights, density of D+ cap D- by spectral truncation, Hoelder on the grids.
    """
    samples = getattr(settings, "DEFAULT_SAMPLES", 1000) if samples is None else samples
    tol = getattr(settings, "ALGEBRAIC_TOL", 1e-12)
    parts = []

    cauchy = ResidualTracker("cauchy_demo", tol)
    plus, pivot = cauchy_demo(1, 3)
    cauchy.update(max(abs(plus - 7.0 / 6.0), abs(pivot - math.sqrt(3.0))), lambda: {"m": 1, "n": 3})
    plus, pivot = cauchy_demo(10, 10**6)
    cauchy.update(max(0.0, plus - 1.0 / 3.0) + max(0.0, 999.0 - pivot), lambda: {"m": 10, "n": 10**6})
    for m in (2, 5, 50, 500):
        tail, bound = cauchy_tail(m)
        cauchy.update(max(0.0, tail - bound), lambda m=m: {"m": m})
    parts.append(cauchy.report())

    ell2 = ell2_two_sided_triple().triple
    reciprocity = ResidualTracker("reciprocity", tol)
    for n in range(1, getattr(settings, "RANDOM_WINDOW", 16) + 1):
        for i in (n, -n):
            e = CoeffVector.basis(ell2.index_set, i)
            reciprocity.update(abs(plus_norm(ell2, e) * minus_norm(ell2, e) - 1.0), lambda i=i: {"i": i})
    parts.append(reciprocity.report())

    density = ResidualTracker("density", tol)
    rng = np.random.default_rng(seed)
    for _ in range(20):
        support = sorted(int(i) for i in rng.choice(np.arange(1, 65), size=4, replace=False) * rng.choice([-1, 1], 4))
        x = CoeffVector(ell2.index_set, tuple((i, complex(c)) for i, c in zip(support, complex_gaussian(rng, 4))))
        errors = density_approximation(ell2, x, levels=(2, 4, 8, 16, 32, 64, 128))
        increase = max((b - a for a, b in zip(errors, errors[1:])), default=0.0)
        density.update(max(0.0, increase) / pivot_norm(x) + errors[-1] / pivot_norm(x),
                       lambda x=x: {"x": [[i, c.real, c.imag] for i, c in x.entries]})
    parts.append(density.report())

    for p in HOLDER_EXPONENTS:
        for n in HOLDER_GRIDS:
            parts.append(lp_discrete_triple(p, n).check_holder(samples, seed))
    return merge_reports("catalog_demos", parts)
