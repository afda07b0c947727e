"""
Configuration management for the aligner jobs

This module loads runtime settings from environment variables. Command-line
flags parsed in ``src.jobs.main`` override whatever is loaded here.

NOTES:
- Alignment and simulation parameters live in validated models
  (``AlignerParams``, ``SimProfile``); this module only covers how a job runs
  (logging, worker count, chunk sizing, execution engine).
- No variable is required: every field has a default suitable for a laptop.
"""

import os
from dataclasses import dataclass
from enum import Enum

DEFAULT_CHUNK_MIN_BYTES = 4 * 1024 * 1024


class Engine(str, Enum):
    """Execution engine used by the align job"""

    LOCAL = "local"
    SPARK = "spark"


@dataclass
class LoggingConfig:
    """Logging configuration"""

    level: str
    structured: bool

    @classmethod
    def from_env(cls) -> "LoggingConfig":
        """Load logging config from environment"""
        return cls(
            level=os.getenv("SNAP_LOG_LEVEL", "INFO").upper(),
            structured=os.getenv("SNAP_LOG_FORMAT", "json").lower() == "json",
        )


@dataclass
class ExecutionConfig:
    """Worker pool and chunk scheduling configuration"""

    threads: int
    chunk_min_bytes: int
    engine: Engine

    @classmethod
    def from_env(cls) -> "ExecutionConfig":
        """Load execution config from environment"""
        return cls(
            threads=int(os.getenv("SNAP_THREADS", str(os.cpu_count() or 1))),
            chunk_min_bytes=int(
                os.getenv("SNAP_CHUNK_MIN_BYTES", str(DEFAULT_CHUNK_MIN_BYTES))
            ),
            engine=Engine(os.getenv("SNAP_ENGINE", "local")),
        )


@dataclass
class SparkConfig:
    """Spark-specific configuration (only read by the spark engine)"""

    app_name: str
    master: str
    executor_memory: str
    executor_cores: int
    driver_memory: str

    @classmethod
    def from_env(cls) -> "SparkConfig":
        """Load Spark config from environment"""
        return cls(
            app_name=os.getenv("SPARK_APP_NAME", "snap-seed-aligner"),
            master=os.getenv("SPARK_MASTER", "local[*]"),
            executor_memory=os.getenv("SPARK_EXECUTOR_MEMORY", "4g"),
            executor_cores=int(os.getenv("SPARK_EXECUTOR_CORES", "2")),
            driver_memory=os.getenv("SPARK_DRIVER_MEMORY", "2g"),
        )


@dataclass
class JobConfig:
    """Complete job configuration"""

    logging: LoggingConfig
    execution: ExecutionConfig
    spark: SparkConfig

    @classmethod
    def from_env(cls) -> "JobConfig":
        """Load complete configuration from environment"""
        return cls(
            logging=LoggingConfig.from_env(),
            execution=ExecutionConfig.from_env(),
            spark=SparkConfig.from_env(),
        )


def get_config() -> JobConfig:
    """
    Get application configuration

    Call this once at the start of a subcommand, then apply CLI overrides.
    """
    return JobConfig.from_env()
