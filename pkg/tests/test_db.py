import pytest

from gelfand import db, suites
from gelfand.errors import ConfigError


@pytest.fixture
def ledger():
    db.init_db("sqlite://")
    yield db


def _report():
    config = suites.load_config({"triple": "identity-3", "suites": ["pairing", "cesaro"], "samples": 10})
    return suites.run_verification(config)


def test_record_and_list(ledger):
    report = _report()
    run_id = ledger.record_run(report)
    runs = ledger.get_runs()
    assert runs[0]["id"] == run_id
    assert runs[0]["triple"] == "identity-3"
    assert runs[0]["ok"] is True
    rows = ledger.get_suite_rows(run_id)
    assert [r["suite"] for r in rows] == ["pairing", "cesaro"]
    assert all(r["status"] == "pass" for r in rows)
    assert ledger.get_run_report(run_id)["suites"][0]["name"] == "pairing"


def test_newest_first(ledger):
    first = ledger.record_run(_report())
    second = ledger.record_run(_report())
    ids = [r["id"] for r in ledger.get_runs(limit=2)]
    assert ids == [second, first]


def test_nan_residual_is_stored_as_null(ledger):
    report = _report()
    report["suites"][0]["max_residual"] = float("nan")
    run_id = ledger.record_run(report)
    assert ledger.get_suite_rows(run_id)[0]["max_residual"] is None


def test_missing_run(ledger):
    assert ledger.get_run_report(10**6) is None


def test_needs_a_url(monkeypatch):
    monkeypatch.setattr(db.settings, "LEDGER_URL", None)
    with pytest.raises(ConfigError):
        db.init_db()
