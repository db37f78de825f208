# gelfand/db.py
"""
Run ledger for verification reports.

Tables:
- VerifyRun: one row per `verify` invocation (triple, seed, samples, overall result, full JSON report)
- SuiteRow: one row per suite of a run (status, max residual, tolerance, runtime)

Usage:
- Call init_db(url) once; the URL defaults to settings.LEDGER_URL.
- Use get_session() context manager for DB operations.
"""

import contextlib
import json
from typing import List, Optional

from sqlalchemy import Boolean, Column, DateTime, Float, ForeignKey, Integer, String, Text, create_engine, func
from sqlalchemy.orm import Session, declarative_base, relationship, sessionmaker
from sqlalchemy.pool import StaticPool

from config import settings
from gelfand.errors import ConfigError

Base = declarative_base()

_engine = None
SessionLocal = None


# --------------------
# Models
# --------------------
class VerifyRun(Base):
    __tablename__ = "verify_runs"
    id = Column(Integer, primary_key=True)
    triple = Column(String(200), nullable=False, index=True)
    kind = Column(String(50), nullable=False)
    seed = Column(Integer, nullable=False)
    samples = Column(Integer, nullable=False)
    ok = Column(Boolean, nullable=False)
    report_json = Column(Text, nullable=False)
    created_at = Column(DateTime(timezone=True), server_default=func.now())

    suites = relationship("SuiteRow", back_populates="run", cascade="all, delete-orphan")


class SuiteRow(Base):
    __tablename__ = "suite_rows"
    id = Column(Integer, primary_key=True)
    run_id = Column(Integer, ForeignKey("verify_runs.id"), nullable=False, index=True)
    suite = Column(String(100), nullable=False)
    status = Column(String(10), nullable=False)
    max_residual = Column(Float, nullable=True)
    tolerance = Column(Float, nullable=True)
    runtime_ms = Column(Float, nullable=True)
    suite_seed = Column(Integer, nullable=True)

    run = relationship("VerifyRun", back_populates="suites")


# --------------------
# DB utilities
# --------------------
def init_db(url: Optional[str] = None) -> None:
    """Bind the ledger to `url` (or settings.LEDGER_URL) and create tables."""
    global _engine, SessionLocal
    url = url or getattr(settings, "LEDGER_URL", None)
    if not url:
        raise ConfigError("no ledger URL: pass one or set GELFAND_LEDGER_URL")
    if url.startswith("sqlite"):
        kwargs = {"connect_args": {"check_same_thread": False}}
        if url in ("sqlite://", "sqlite:///:memory:"):
            kwargs["poolclass"] = StaticPool
        _engine = create_engine(url, future=True, **kwargs)
    else:
        _engine = create_engine(url, pool_pre_ping=True, future=True)
    SessionLocal = sessionmaker(bind=_engine, autoflush=False, autocommit=False, future=True)
    Base.metadata.create_all(bind=_engine)


@contextlib.contextmanager
def get_session() -> Session:
    if SessionLocal is None:
        init_db()
    session = SessionLocal()
    try:
        yield session
    finally:
        session.close()


# --------------------
# High-level helpers
# --------------------
def _finite(x) -> Optional[float]:
    try:
        x = float(x)
    except (TypeError, ValueError):
        return None
    return x if x == x else None  # NaN is stored as NULL


def record_run(report: dict) -> int:
    """Store a run report and its suite rows; returns the run id."""
    with get_session() as session:
        run = VerifyRun(
            triple=str(report["triple"]),
            kind=str(report.get("kind", "")),
            seed=int(report["seed"]),
            samples=int(report["samples"]),
            ok=bool(report["ok"]),
            report_json=json.dumps(report, default=str),
        )
        for row in report.get("suites", []):
            run.suites.append(SuiteRow(
                suite=row["name"],
                status=row["status"],
                max_residual=_finite(row.get("max_residual")),
                tolerance=_finite(row.get("tolerance_used")),
                runtime_ms=_finite(row.get("runtime_ms")),
                suite_seed=row.get("seed"),
            ))
        session.add(run)
        session.commit()
        session.refresh(run)
        return run.id


def get_runs(limit: int = 20) -> List[dict]:
    with get_session() as session:
        runs = session.query(VerifyRun).order_by(VerifyRun.id.desc()).limit(limit).all()
        return [{
            "id": r.id,
            "triple": r.triple,
            "kind": r.kind,
            "seed": r.seed,
            "samples": r.samples,
            "ok": r.ok,
            "created_at": r.created_at.isoformat() if r.created_at else None,
        } for r in runs]


def get_suite_rows(run_id: int) -> List[dict]:
    with get_session() as session:
        rows = session.query(SuiteRow).filter_by(run_id=run_id).order_by(SuiteRow.id).all()
        return [{
            "suite": r.suite,
            "status": r.status,
            "max_residual": r.max_residual,
            "tolerance": r.tolerance,
            "runtime_ms": r.runtime_ms,
            "seed": r.suite_seed,
        } for r in rows]


def get_run_report(run_id: int) -> Optional[dict]:
    with get_session() as session:
        run = session.get(VerifyRun, run_id)
        return json.loads(run.report_json) if run else None
