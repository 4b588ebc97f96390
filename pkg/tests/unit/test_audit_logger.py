"""
Tests for JSON audit events.
"""

import json

import pytest

from src.logging.audit_logger import AuditLogger


@pytest.fixture(autouse=True)
def _restore_session_handlers(_audit_log_to_tmp):
    # Every AuditLogger shares the "agripv.audit" logger; put the session handlers back.
    yield
    AuditLogger(log_path=str(_audit_log_to_tmp), log_level="INFO")


def events(path):
    return [json.loads(line) for line in path.read_text(encoding="utf-8").splitlines() if line.strip()]


def test_run_events_are_json_lines(tmp_path):
    path = tmp_path / "logs" / "audit.log"
    audit = AuditLogger(log_path=str(path), log_level="DEBUG")
    audit.log_run_started("run", "abc", [0, 1], {"jobs": 2})
    audit.log_day_advanced(1, 0.01, 0.002, 0.05)
    audit.log_run_completed("run", "abc", 1.23456, {"ler_total": 1.2})

    logged = events(path)
    assert [e["event"] for e in logged] == ["run_started", "day_advanced", "run_completed"]
    assert logged[0]["seeds"] == [0, 1]
    assert logged[0]["level"] == "INFO"
    assert "timestamp" in logged[0]
    assert logged[2]["wall_clock_s"] == 1.235
    assert logged[2]["summary"] == {"ler_total": 1.2}


def test_validation_failure_is_warning(tmp_path, capsys):
    path = tmp_path / "audit.log"
    audit = AuditLogger(log_path=str(path))
    audit.log_validation_failure("scenario.json", "ConfigError", "omega out of range")

    logged = events(path)
    assert logged[-1]["event"] == "validation_failure"
    assert logged[-1]["level"] == "WARNING"
    assert "validation_failure" in capsys.readouterr().err


def test_stderr_only(tmp_path):
    audit = AuditLogger(log_path=None)
    assert audit.log_path is None
    audit.log_system_event("outputs_written", {"files": 3})
