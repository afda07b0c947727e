"""Tests for environment configuration and structured logging."""

import json
import logging
from dataclasses import fields

import pytest

from src.utils.config import (
    DEFAULT_CHUNK_MIN_BYTES,
    Engine,
    ExecutionConfig,
    LoggingConfig,
    get_config,
)
from src.utils.logging_setup import (
    LOGGER_NAME,
    PACKAGE_LOGGER,
    ContextAdapter,
    StructuredFormatter,
    log_execution_time,
    setup_logging,
)


@pytest.fixture(autouse=True)
def clean_loggers():
    yield
    for name in (PACKAGE_LOGGER, LOGGER_NAME):
        configured = logging.getLogger(name)
        configured.handlers = []
        configured.setLevel(logging.NOTSET)


class TestConfig:
    def test_defaults(self, monkeypatch):
        for name in (
            "SNAP_LOG_LEVEL",
            "SNAP_LOG_FORMAT",
            "SNAP_CHUNK_MIN_BYTES",
            "SNAP_ENGINE",
        ):
            monkeypatch.delenv(name, raising=False)
        monkeypatch.setenv("SNAP_THREADS", "3")

        config = get_config()

        assert config.logging == LoggingConfig(level="INFO", structured=True)
        assert config.execution == ExecutionConfig(3, DEFAULT_CHUNK_MIN_BYTES, Engine.LOCAL)
        assert [f.name for f in fields(config)] == ["logging", "execution", "spark"]

    def test_environment_overrides(self, monkeypatch):
        monkeypatch.setenv("SNAP_LOG_LEVEL", "debug")
        monkeypatch.setenv("SNAP_LOG_FORMAT", "text")
        monkeypatch.setenv("SNAP_CHUNK_MIN_BYTES", "1024")
        monkeypatch.setenv("SNAP_ENGINE", "spark")
        monkeypatch.setenv("SPARK_MASTER", "local[4]")

        config = get_config()

        assert config.logging == LoggingConfig(level="DEBUG", structured=False)
        assert config.execution.chunk_min_bytes == 1024
        assert config.execution.engine is Engine.SPARK
        assert config.spark.master == "local[4]"

    def test_bad_engine(self, monkeypatch):
        monkeypatch.setenv("SNAP_ENGINE", "gpu")

        with pytest.raises(ValueError):
            get_config()


def _record(**extra):
    record = logging.LogRecord("src.jobs.align_job", logging.INFO, __file__, 10, "hello", (), None)
    for key, value in extra.items():
        setattr(record, key, value)
    return record


class TestStructuredFormatter:
    def test_json_fields(self):
        payload = json.loads(StructuredFormatter().format(_record()))

        assert payload["level"] == "INFO"
        assert payload["logger"] == "src.jobs.align_job"
        assert payload["message"] == "hello"
        assert payload["timestamp"].endswith("Z")

    def test_only_whitelisted_context(self):
        payload = json.loads(StructuredFormatter().format(_record(reads=12, secret="x")))

        assert payload["reads"] == 12
        assert "secret" not in payload

    def test_contig_context(self):
        payload = json.loads(StructuredFormatter().format(_record(contig="chr2")))

        assert payload["contig"] == "chr2"
        assert "path" not in payload


class TestSetupLogging:
    def test_module_loggers_share_the_handler(self):
        setup_logging("WARNING", structured=True)

        assert logging.getLogger(PACKAGE_LOGGER).level == logging.WARNING
        assert logging.getLogger(PACKAGE_LOGGER).handlers == logging.getLogger(LOGGER_NAME).handlers

    def test_run_id_adapter_merges_extra(self, caplog):
        logger = setup_logging("INFO", structured=False, run_id="align-1")
        assert isinstance(logger, ContextAdapter)

        with caplog.at_level(logging.INFO, logger=LOGGER_NAME):
            logger.info("chunk done", extra={"reads": 5})

        (record,) = [r for r in caplog.records if r.getMessage() == "chunk done"]
        assert record.run_id == "align-1"
        assert record.reads == 5


class TestLogExecutionTime:
    def test_success(self, caplog):
        logger = logging.getLogger("src.tests.timing")

        with caplog.at_level(logging.INFO, logger="src.tests.timing"):
            with log_execution_time(logger, "Index build", seed_size=20):
                pass

        messages = [r.getMessage() for r in caplog.records]
        assert messages == ["Starting: Index build", "Completed: Index build"]
        assert caplog.records[-1].seed_size == 20
        assert caplog.records[-1].duration_ms >= 0

    def test_failure_is_logged_and_reraised(self, caplog):
        logger = logging.getLogger("src.tests.timing")

        with caplog.at_level(logging.INFO, logger="src.tests.timing"):
            with pytest.raises(RuntimeError):
                with log_execution_time(logger, "Alignment"):
                    raise RuntimeError("boom")

        assert caplog.records[-1].levelname == "ERROR"
        assert caplog.records[-1].error == "boom"
