"""
Logging configuration for the aligner jobs

LOGGING CONVENTIONS:
1. Structured (JSON) records by default, one object per line, so runs can be
   grepped and loaded into a dataframe afterwards.
2. Logs go to stderr: the align and simulate subcommands may stream SAM or
   FASTQ on stdout.
3. Levels:
   - DEBUG: per-chunk and per-read detail (chunk boundaries, skipped seeds)
   - INFO: milestones (index built, chunk finished, report written)
   - WARNING: recoverable input problems (empty FASTQ, no confident reads)
   - ERROR: failures that end the job
4. Context goes in ``extra=``; only whitelisted keys are rendered.
"""

import json
import logging
import sys
import time
from contextlib import contextmanager
from datetime import datetime, timezone
from typing import Any, Dict, Iterator, Optional

LOGGER_NAME = "snap"
# Module loggers are named after their import path (src.index.seed_index, ...)
PACKAGE_LOGGER = "src"

# Keys from ``extra=`` that are copied into the JSON record
CONTEXT_FIELDS = (
    "run_id",
    "job",
    "path",
    "contig",
    "worker",
    "chunk_start",
    "chunk_end",
    "reads",
    "records",
    "seed_size",
    "duration_ms",
    "error",
)


class StructuredFormatter(logging.Formatter):
    """JSON formatter for structured logging"""

    def format(self, record: logging.LogRecord) -> str:
        """Format log record as JSON"""
        log_data: Dict[str, Any] = {
            "timestamp": datetime.now(timezone.utc).isoformat().replace("+00:00", "Z"),
            "level": record.levelname,
            "logger": record.name,
            "message": record.getMessage(),
            "module": record.module,
            "function": record.funcName,
            "line": record.lineno,
        }

        if record.exc_info:
            log_data["exception"] = self.formatException(record.exc_info)

        for field in CONTEXT_FIELDS:
            if hasattr(record, field):
                log_data[field] = getattr(record, field)

        return json.dumps(log_data, default=str)


class ContextAdapter(logging.LoggerAdapter):
    """LoggerAdapter that merges its context into each call's ``extra``"""

    def process(self, msg: Any, kwargs: Any) -> Any:
        kwargs["extra"] = {**(self.extra or {}), **kwargs.get("extra", {})}
        return msg, kwargs


def setup_logging(
    log_level: str = "INFO",
    structured: bool = True,
    run_id: Optional[str] = None,
) -> logging.Logger:
    """
    Configure the ``snap`` job logger and the ``src`` module loggers

    Args:
        log_level: Logging level (DEBUG, INFO, WARNING, ERROR)
        structured: Use JSON structured logging
        run_id: Identifier attached to every record of this run

    Returns:
        Configured logger (a LoggerAdapter when ``run_id`` is given)

    USAGE:
        logger = setup_logging(log_level="INFO", run_id="align-20261018-101500")
        logger.info("Index loaded", extra={"path": index_path})
    """
    level = getattr(logging, log_level.upper())
    handler = logging.StreamHandler(sys.stderr)
    handler.setLevel(level)

    if structured:
        formatter: logging.Formatter = StructuredFormatter()
    else:
        formatter = logging.Formatter("%(asctime)s - %(name)s - %(levelname)s - %(message)s")

    handler.setFormatter(formatter)
    for name in (PACKAGE_LOGGER, LOGGER_NAME):
        configured = logging.getLogger(name)
        configured.setLevel(level)
        configured.handlers = [handler]

    logger = logging.getLogger(LOGGER_NAME)

    if run_id:
        return ContextAdapter(logger, {"run_id": run_id})  # type: ignore[return-value]

    return logger


@contextmanager
def log_execution_time(logger: Any, operation: str, **extra_fields: Any) -> Iterator[None]:
    """
    Context manager to log operation execution time

    USAGE:
        with log_execution_time(logger, "Index build", seed_size=20):
            index = build_index(genome, 20)
    """
    start_time = time.perf_counter()
    logger.info(f"Starting: {operation}", extra=extra_fields)

    try:
        yield
    except Exception as e:
        duration_ms = int((time.perf_counter() - start_time) * 1000)
        logger.error(
            f"Failed: {operation}",
            extra={"duration_ms": duration_ms, "error": str(e), **extra_fields},
            exc_info=True,
        )
        raise
    else:
        duration_ms = int((time.perf_counter() - start_time) * 1000)
        logger.info(
            f"Completed: {operation}",
            extra={"duration_ms": duration_ms, **extra_fields},
        )
