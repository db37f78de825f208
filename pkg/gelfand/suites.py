# gelfand/suites.py
"""
Verification harness behind `verify`.

Responsibilities:
- parse a verification config (triple source, suites, samples, seed, tolerance overrides)
- run the named suites, optionally on worker threads
- derive each suite's seed from the master seed and the suite name, so
  scheduling never changes a result
- render reports as JSON, text and residual CSV tables

A suite never raises on a failed property; a failing suite always carries a
counterexample and the seed that reproduces it.
"""

import csv
import hashlib
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Tuple, Union

from config import settings
from gelfand import catalog, decomp, relations, triple, zspace
from gelfand.core import TolerancePolicy, merge_reports
from gelfand.errors import ConfigError, GelfandError, ParseError
from gelfand.triple import QuasiTriple

logger = logging.getLogger("suites")
logger.setLevel(logging.INFO)

DECOMPOSITION_CUTS = ((0.0, 1.0), (0.0, 2.0))
APPENDIX_COUNT = 100
ORACLE_VECTORS = 20


# -------------------------
# Suites
# -------------------------
def _pairing(T: QuasiTriple, samples: int, seed: int) -> dict:
    return merge_reports("pairing", [triple.check_pairing_identity(T, samples, seed),
                                     triple.check_interpolation(T, samples, seed + 1)])


def _minus_norm_oracle(T: QuasiTriple, samples: int, seed: int) -> dict:
    return triple.check_minus_norm_oracle(T, vectors=ORACLE_VECTORS, trials=samples, seed=seed)


def _gram_roundtrip(T: QuasiTriple, samples: int, seed: int) -> dict:
    return merge_reports("gram_roundtrip", [triple.check_gram_roundtrip(count=20, seed=seed, tolerance=T.tolerance),
                                            triple.check_inverse_gram_norms(T, samples, seed + 1)])


def _pivot_split(T: QuasiTriple, samples: int, seed: int) -> dict:
    return triple.check_pivot_split(T, samples, seed)


def _zspace(T: QuasiTriple, samples: int, seed: int) -> dict:
    return zspace.check_zspace(T, samples, seed)


def _decomposition(T: QuasiTriple, samples: int, seed: int) -> dict:
    parts = []
    for a, b in DECOMPOSITION_CUTS:
        split = decomp.decompose(T, (a, b))
        report = decomp.verify_decomposition(split, T, samples, seed, getattr(settings, "VERIFY_WORKERS", 1))
        report["name"] = f"cut_{a:g}_{b:g}"
        parts.append(report)
    return merge_reports("decomposition", parts)


def _relations(T: QuasiTriple, samples: int, seed: int) -> dict:
    count = min(APPENDIX_COUNT, samples)
    tol = T.tolerance.algebraic_tol
    return merge_reports("relations", [
        relations.check_adjoint_identities(count, seed, tolerance=tol),
        relations.check_change_of_pairing(count, seed + 1, tolerance=tol),
        relations.check_von_neumann(count, seed + 2, tolerance=tol),
    ])


def _cesaro(T: QuasiTriple, samples: int, seed: int) -> dict:
    return relations.check_cesaro(seed)


def _catalog_demos(T: QuasiTriple, samples: int, seed: int) -> dict:
    return catalog.check_catalog_demos(samples, seed)


SUITES: Dict[str, Callable[[QuasiTriple, int, int], dict]] = {
    "pairing": _pairing,
    "minus-norm-oracle": _minus_norm_oracle,
    "gram-roundtrip": _gram_roundtrip,
    "pivot-split": _pivot_split,
    "zspace": _zspace,
    "decomposition": _decomposition,
    "relations": _relations,
    "cesaro": _cesaro,
    "catalog-demos": _catalog_demos,
}


def sub_seed(master: int, name: str) -> int:
    """Deterministic 32-bit seed for one suite."""
    digest = hashlib.sha256(f"{master}:{name}".encode("utf-8")).digest()
    return int.from_bytes(digest[:4], "big")


# -------------------------
# Config
# -------------------------
@dataclass(frozen=True)
class VerifyConfig:
    triple: Union[str, dict]
    suites: Tuple[str, ...] = tuple(SUITES)
    samples: int = 1000
    seed: int = 0
    tolerance: dict = field(default_factory=dict)
    workers: int = 1

    @property
    def triple_label(self) -> str:
        return self.triple if isinstance(self.triple, str) else "inline"


def load_config(obj: Union[dict, str]) -> VerifyConfig:
    """
    Accepts a parsed JSON object or a catalog name. Unknown suites, a
    non-positive sample count or a missing triple raise ConfigError.
    """
    if isinstance(obj, str):
        obj = {"triple": obj}
    if not isinstance(obj, dict) or "triple" not in obj:
        raise ConfigError("config needs a 'triple' entry (catalog name or triple JSON)")
    suites = obj.get("suites", "all")
    if suites == "all":
        suites = list(SUITES)
    if isinstance(suites, str):
        suites = [s.strip() for s in suites.split(",") if s.strip()]
    unknown = [s for s in suites if s not in SUITES]
    if unknown:
        raise ConfigError(f"unknown suites {unknown}; known: {list(SUITES)}")
    try:
        samples = int(obj.get("samples", getattr(settings, "DEFAULT_SAMPLES", 1000)))
        seed = int(obj.get("seed", getattr(settings, "DEFAULT_SEED", 0)))
        workers = int(obj.get("workers", getattr(settings, "VERIFY_WORKERS", 1)))
    except (TypeError, ValueError) as e:
        raise ConfigError(f"bad numeric field in config: {e}") from e
    if samples < 1 or workers < 1:
        raise ConfigError("samples and workers must be positive")
    tolerance = obj.get("tolerance") or {}
    if not isinstance(tolerance, dict):
        raise ConfigError("tolerance overrides must be an object")
    return VerifyConfig(obj["triple"], tuple(suites), samples, seed, dict(tolerance), workers)


def build_triple(config: VerifyConfig) -> QuasiTriple:
    """Catalog name or inline triple JSON; config tolerance overrides win."""
    if isinstance(config.triple, str):
        base = TolerancePolicy.from_settings().to_json()
        base.update(config.tolerance)
        return catalog.get_instance(config.triple, TolerancePolicy.from_json(base)).triple
    if not isinstance(config.triple, dict):
        raise ParseError("triple must be a catalog name or a triple object")
    obj = dict(config.triple)
    merged = dict(obj.get("tolerance") or {})
    merged.update(config.tolerance)
    obj["tolerance"] = merged
    return triple.triple_from_json(obj)


# -------------------------
# Running
# -------------------------
def run_suite(name: str, T: QuasiTriple, samples: int, seed: int) -> dict:
    if name not in SUITES:
        raise ConfigError(f"unknown suite {name!r}")
    suite_seed = sub_seed(seed, name)
    started = time.perf_counter()
    try:
        details = SUITES[name](T, samples, suite_seed)
    except GelfandError as e:
        logger.error(f"suite {name} raised {e.__class__.__name__}: {e}")
        details = {"name": name, "ok": False, "max_residual": float("nan"), "tolerance": 0.0,
                   "error": f"{e.__class__.__name__}: {e}"}
    runtime_ms = (time.perf_counter() - started) * 1000.0

    out = {
        "name": name,
        "status": "pass" if details["ok"] else "fail",
        "max_residual": details["max_residual"],
        "tolerance_used": details["tolerance"],
        "runtime_ms": runtime_ms,
        "seed": suite_seed,
        "details": details,
    }
    if not details["ok"]:
        out["counterexample"] = dict(details.get("counterexample") or {}, seed=suite_seed)
        logger.warning(f"suite {name} failed: max residual {details['max_residual']:.3e} "
                       f"(tolerance {details['tolerance']:.1e}, seed {suite_seed})")
    else:
        logger.info(f"suite {name} passed in {runtime_ms:.0f} ms")
    return out


def run_verification(config: VerifyConfig, T: Optional[QuasiTriple] = None) -> dict:
    T = T or build_triple(config)
    logger.info(f"verifying {config.triple_label}: suites {list(config.suites)}, "
                f"samples {config.samples}, seed {config.seed}")

    def job(name: str) -> dict:
        return run_suite(name, T, config.samples, config.seed)

    if config.workers > 1:
        with ThreadPoolExecutor(max_workers=config.workers) as pool:
            rows = list(pool.map(job, config.suites))
    else:
        rows = [job(name) for name in config.suites]

    return {
        "triple": config.triple_label,
        "kind": T.gram.kind,
        "seed": config.seed,
        "samples": config.samples,
        "tolerance": T.tolerance.to_json(),
        "ok": all(r["status"] == "pass" for r in rows),
        "suites": rows,
    }


# -------------------------
# Rendering
# -------------------------
def report_to_json(report: dict) -> str:
    return json.dumps(report, default=str, indent=2)


def render_report_text(report: dict) -> str:
    lines = [f"Verification report - triple: {report['triple']} ({report['kind']})",
             f"Seed: {report['seed']}  Samples: {report['samples']}",
             "Suites:"]
    for row in report["suites"]:
        lines.append(f"  - {row['name']}: {row['status']}  max residual {row['max_residual']:.3e}"
                     f"  tolerance {row['tolerance_used']:.1e}  ({row['runtime_ms']:.0f} ms)")
        if row["status"] == "fail":
            lines.append(f"      counterexample: {json.dumps(row['counterexample'], default=str)[:200]}")
    lines.append("Result: " + ("PASS" if report["ok"] else "FAIL"))
    return "\n".join(lines)


def residual_rows(report: dict) -> List[dict]:
    """One row per suite and per named sub-check."""
    rows = []

    def walk(suite: str, node: dict, path: str) -> None:
        rows.append({"suite": suite, "check": path, "ok": node["ok"],
                     "max_residual": node["max_residual"], "tolerance": node["tolerance"]})
        for name, child in (node.get("checks") or {}).items():
            walk(suite, child, f"{path}/{name}")

    for row in report.get("suites", []):
        walk(row["name"], row["details"], row["details"]["name"])
    return rows


def write_residual_csv(report: dict, path: str) -> int:
    rows = residual_rows(report)
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=["suite", "check", "ok", "max_residual", "tolerance"])
        writer.writeheader()
        writer.writerows(rows)
    return len(rows)
