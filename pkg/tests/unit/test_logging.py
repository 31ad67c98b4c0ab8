"""Unit tests for structured logging."""

import json

import pytest

from symbench.config import LoggingConfig
from symbench.utils.logging import (
    LoggerMixin,
    bind_context,
    clear_context,
    get_logger,
    setup_logging,
    unbind_context,
)


@pytest.fixture(autouse=True)
def restore_logging():
    yield
    clear_context()
    setup_logging(LoggingConfig())


def json_lines(text):
    return [json.loads(line) for line in text.splitlines() if line.strip()]


class TestSetupLogging:
    """Tests for the processor chain and renderers."""

    def test_json_to_stdout(self, capsys):
        """Test events carry service fields and bound campaign identifiers."""
        setup_logging(LoggingConfig(level="INFO", format="json", output="stdout"))
        bind_context(campaign_id="number_n4", master_seed=7, unrelated="dropped")
        get_logger("test").info("curve_estimated", label="D")
        unbind_context("campaign_id", "master_seed", "unrelated")
        get_logger("test").info("campaign_completed")

        first, second = json_lines(capsys.readouterr().out)
        assert first["event"] == "curve_estimated"
        assert first["service"] == "symbench"
        assert first["campaign_id"] == "number_n4"
        assert first["master_seed"] == 7
        assert "unrelated" not in first
        assert "campaign_id" not in second

    def test_level_filters_events(self, capsys):
        setup_logging(LoggingConfig(level="WARNING", format="json", output="stdout"))
        log = get_logger("test")
        log.info("hidden")
        log.warning("shown")
        events = [entry["event"] for entry in json_lines(capsys.readouterr().out)]
        assert events == ["shown"]

    def test_file_output(self, tmp_path):
        """Test file records are JSON documents wrapping the rendered event."""
        log_file = tmp_path / "logs" / "symbench.log"
        setup_logging(LoggingConfig(level="INFO", output="file", log_file=log_file))
        bind_context(kind="parity")
        get_logger("campaign").info("campaign_started", output_dir="results")

        record = json_lines(log_file.read_text())[-1]
        assert record["levelname"] == "INFO"
        event = json.loads(record["message"])
        assert event["event"] == "campaign_started"
        assert event["kind"] == "parity"


class TestLoggerMixin:
    """Tests for LoggerMixin."""

    def test_logger_is_cached(self):
        class Worker(LoggerMixin):
            pass

        worker = Worker()
        assert worker.log is worker.log
