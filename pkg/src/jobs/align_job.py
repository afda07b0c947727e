"""
Align job: seed index + FASTQ -> SAM

EXECUTION ENGINES:
- threads == 1: chunks are aligned in-process, in order.
- threads > 1: a process pool whose initializer loads the index once per
  worker. The coordinator keeps one chunk in flight per worker and cuts the
  next chunk from the shared cursor whenever a worker finishes, so chunk
  sizes shrink as the input runs out.
- engine == spark: see ``src.jobs.spark_align``.

OUTPUT ORDER:
By default chunks are written as they complete. With ``stable_order`` a
chunk is held back until every chunk before it has been written, which
reproduces input order exactly. Classifications never depend on the engine,
the thread count or the chunk sizes.

gzip FASTQ input is decompressed to a temporary file first, because workers
address the input by byte offset.
"""

import gzip
import logging
import os
import shutil
import sys
import tempfile
import time
from concurrent.futures import FIRST_COMPLETED, Future, ProcessPoolExecutor, wait
from contextlib import contextmanager
from dataclasses import dataclass, field
from typing import Dict, Iterator, Optional, Set, TextIO

from src import __version__
from src.alignment.aligner import AlignerParams, AlignmentStats
from src.evaluation.harness import EvalReport, ScoreTally
from src.formats.sam import sam_header
from src.jobs.chunk_worker import (
    ChunkOutput,
    align_chunk,
    align_chunk_in_worker,
    init_worker,
)
from src.jobs.index_job import load_index_file, load_reference
from src.jobs.scheduler import ChunkCursor, plan_chunks
from src.utils.config import DEFAULT_CHUNK_MIN_BYTES, Engine, SparkConfig
from src.utils.logging_setup import log_execution_time

logger = logging.getLogger(__name__)


@dataclass
class AlignJobResult:
    """What a finished align run reports back to the CLI"""

    reads: int
    chunks: int
    elapsed_seconds: float
    stats: AlignmentStats
    report: Optional[EvalReport] = None


@dataclass
class _ChunkWriter:
    """Writes chunk outputs as they arrive, or in chunk order when ``stable_order``"""

    sink: TextIO
    stable_order: bool
    next_start: int = 0
    pending: Dict[int, ChunkOutput] = field(default_factory=dict)
    stats: AlignmentStats = field(default_factory=AlignmentStats)
    tally: ScoreTally = field(default_factory=ScoreTally)
    chunks: int = 0

    def add(self, output: ChunkOutput) -> None:
        self.chunks += 1
        self.stats.merge(output.stats)
        self.tally.merge(output.tally)
        if not self.stable_order:
            self._write(output)
            return
        self.pending[output.chunk.start] = output
        while self.next_start in self.pending:
            ready = self.pending.pop(self.next_start)
            self._write(ready)
            self.next_start = ready.chunk.end

    def _write(self, output: ChunkOutput) -> None:
        for line in output.lines:
            self.sink.write(line + "\n")


@contextmanager
def _plain_fastq(path: str) -> Iterator[str]:
    """Path of an uncompressed copy of ``path`` (``path`` itself when not gzip)"""
    with open(path, "rb") as handle:
        compressed = handle.read(2) == b"\x1f\x8b"
    if not compressed:
        yield path
        return

    fd, tmp_path = tempfile.mkstemp(prefix="snap-reads-", suffix=".fastq")
    try:
        with os.fdopen(fd, "wb") as sink, gzip.open(path, "rb") as source:
            shutil.copyfileobj(source, sink)
        logger.info("Decompressed gzip FASTQ", extra={"path": path})
        yield tmp_path
    finally:
        os.unlink(tmp_path)


@contextmanager
def _open_output(path: str) -> Iterator[TextIO]:
    if path == "-":
        yield sys.stdout
        sys.stdout.flush()
        return
    with open(path, "w", encoding="ascii") as sink:
        yield sink


def _run_pool(
    index_path: str,
    fastq_path: str,
    cursor: ChunkCursor,
    params: AlignerParams,
    threads: int,
    writer: _ChunkWriter,
) -> None:
    with ProcessPoolExecutor(
        max_workers=threads, initializer=init_worker, initargs=(index_path, params)
    ) as pool:
        in_flight: Set[Future] = set()

        def submit_next() -> None:
            chunk = cursor.take()
            if chunk is not None:
                in_flight.add(pool.submit(align_chunk_in_worker, fastq_path, chunk))

        for _ in range(threads):
            submit_next()
        while in_flight:
            done, _ = wait(in_flight, return_when=FIRST_COMPLETED)
            for future in done:
                in_flight.remove(future)
                writer.add(future.result())
                submit_next()


def run_align(
    index_path: str,
    fastq_path: str,
    output_path: str,
    params: AlignerParams,
    threads: int = 1,
    chunk_min_bytes: int = DEFAULT_CHUNK_MIN_BYTES,
    stable_order: bool = False,
    engine: Engine = Engine.LOCAL,
    spark_config: Optional[SparkConfig] = None,
    reference_path: Optional[str] = None,
) -> AlignJobResult:
    """
    Align every read of ``fastq_path`` and write one SAM record per read

    Args:
        index_path: Seed index file
        fastq_path: FASTQ input, plain or gzip
        output_path: SAM destination, "-" for stdout
        params: Aligner parameters; seed size must match the index
        threads: Worker processes for the local engine
        chunk_min_bytes: Smallest chunk handed to a worker
        stable_order: Write records in input order
        engine: local or spark
        spark_config: Spark session settings (spark engine only)
        reference_path: When given, the index must have been built over this reference

    Returns:
        AlignJobResult; ``report`` is None for an empty input

    Raises:
        OSError: unreadable input or unwritable output
        ValueError: bad index, FASTQ or parameters
    """
    if threads < 1:
        raise ValueError(f"threads must be >= 1, got {threads}")
    expected = load_reference(reference_path) if reference_path else None
    index = load_index_file(index_path, expected)
    if index.seed_size != params.seed_size:
        raise ValueError(
            f"Index seed size {index.seed_size} does not match --seed-size {params.seed_size}"
        )

    with _plain_fastq(fastq_path) as plain_path:
        total = os.path.getsize(plain_path)
        start = time.perf_counter()
        with _open_output(output_path) as sink, log_execution_time(
            logger, "Alignment", path=fastq_path
        ):
            sink.write("\n".join(sam_header(index.genome, params, __version__)) + "\n")
            writer = _ChunkWriter(sink=sink, stable_order=stable_order)

            if engine is Engine.SPARK:
                from src.jobs.spark_align import run_spark_align

                chunks = plan_chunks(total, threads, chunk_min_bytes)
                for output in run_spark_align(
                    index_path, plain_path, chunks, params, spark_config or SparkConfig.from_env()
                ):
                    writer.add(output)
            elif threads == 1:
                for chunk in ChunkCursor(total, 1, chunk_min_bytes):
                    writer.add(align_chunk(plain_path, chunk, index, params))
            else:
                cursor = ChunkCursor(total, threads, chunk_min_bytes)
                _run_pool(index_path, plain_path, cursor, params, threads, writer)
        elapsed = time.perf_counter() - start

    reads = writer.tally.total
    report = None
    if reads:
        report = writer.tally.to_report(elapsed, writer.stats.to_dict())
    else:
        logger.warning("Input FASTQ contained no reads", extra={"path": fastq_path})

    logger.info(
        f"Aligned {reads} reads in {writer.chunks} chunks",
        extra={"reads": reads, "records": writer.chunks, "duration_ms": int(elapsed * 1000)},
    )
    return AlignJobResult(
        reads=reads,
        chunks=writer.chunks,
        elapsed_seconds=elapsed,
        stats=writer.stats,
        report=report,
    )
