"""
Spark execution engine for the align job

The driver plans the chunk list with the same cursor as the local engine,
parallelizes it with one chunk per partition, and each partition loads the
index once and aligns its byte ranges with ``align_chunk``. ``collect``
returns the outputs in chunk order, so the SAM file is identical to a
stable-order local run.

SPARK EXECUTION MODEL:
1. Driver builds ``[(start, end), ...]`` from ``plan_chunks``
2. ``parallelize`` with one partition per chunk
3. ``mapPartitions`` runs ``align_partition`` on executors
4. Driver collects ChunkOutput objects and writes them

The index file and the FASTQ file must be readable from every executor at
the same path (local mode, or a shared filesystem).

pyspark is an optional dependency (``spark`` extra); it is imported when the
engine starts.
"""

import logging
from typing import Iterable, Iterator, List, Tuple

from src.alignment.aligner import AlignerParams
from src.jobs.chunk_worker import ChunkOutput, align_chunk
from src.jobs.index_job import load_index_file
from src.jobs.scheduler import WorkChunk
from src.utils.config import SparkConfig
from src.utils.logging_setup import log_execution_time

logger = logging.getLogger(__name__)


def align_partition(
    ranges: Iterable[Tuple[int, int]], index_path: str, fastq_path: str, params_json: str
) -> Iterator[ChunkOutput]:
    """
    Align the byte ranges of one partition (runs on an executor)

    Each executor loads its own copy of the index; SeedIndex objects are not
    shipped from the driver.
    """
    index = load_index_file(index_path)
    params = AlignerParams.model_validate_json(params_json)
    for start, end in ranges:
        yield align_chunk(fastq_path, WorkChunk(start, end), index, params)


def run_spark_align(
    index_path: str,
    fastq_path: str,
    chunks: List[WorkChunk],
    params: AlignerParams,
    config: SparkConfig,
) -> List[ChunkOutput]:
    """Align ``chunks`` on Spark; outputs come back in chunk order"""
    from pyspark.sql import SparkSession

    logger.info("Initializing Spark session...")
    spark = (
        SparkSession.builder.appName(config.app_name)
        .master(config.master)
        .config("spark.executor.memory", config.executor_memory)
        .config("spark.executor.cores", str(config.executor_cores))
        .config("spark.driver.memory", config.driver_memory)
        .getOrCreate()
    )
    params_json = params.model_dump_json()
    ranges = [(chunk.start, chunk.end) for chunk in chunks]

    try:
        with log_execution_time(logger, "Spark alignment", path=fastq_path):
            rdd = spark.sparkContext.parallelize(ranges, max(len(ranges), 1))
            outputs: List[ChunkOutput] = rdd.mapPartitions(
                lambda partition: align_partition(partition, index_path, fastq_path, params_json)
            ).collect()
    finally:
        spark.stop()
    return outputs
