"""
Alignment of one byte range of a FASTQ file

This is the unit of work shared by every execution engine: in-process,
process pool and Spark partitions all call ``align_chunk`` with the same
arguments and get the same output.
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict, List

from src.alignment.aligner import AlignerParams, AlignmentStats, align_read
from src.evaluation.harness import AlignmentCall, ScoredRead, ScoreTally, score_result
from src.formats.fastq import iter_fastq_range
from src.formats.sam import write_sam
from src.index.seed_index import SeedIndex
from src.jobs.index_job import load_index_file
from src.jobs.scheduler import WorkChunk
from src.simulation.simulator import decode_truth

logger = logging.getLogger(__name__)

# Per-process state installed by ``init_worker``
_WORKER_STATE: Dict[str, Any] = {}


@dataclass
class ChunkOutput:
    """SAM lines (in input order), score counts and alignment counters for one chunk"""

    chunk: WorkChunk
    lines: List[str] = field(default_factory=list)
    tally: ScoreTally = field(default_factory=ScoreTally)
    stats: AlignmentStats = field(default_factory=AlignmentStats)


def align_chunk(
    fastq_path: str, chunk: WorkChunk, index: SeedIndex, params: AlignerParams
) -> ChunkOutput:
    """Align every record whose first byte lies in ``chunk``"""
    genome = index.genome
    output = ChunkOutput(chunk=chunk)
    for _, read in iter_fastq_range(fastq_path, chunk.start, chunk.end):
        result = align_read(read, index, genome, params, output.stats)
        output.lines.append(write_sam(result, read, genome).to_line())

        truth = decode_truth(read.name)
        call = AlignmentCall.from_result(read.name, result, genome)
        outcome = score_result(call, truth) if truth is not None else None
        output.tally.add(ScoredRead(kind=result.kind, outcome=outcome))

    logger.debug(
        f"Aligned chunk of {len(output.lines)} reads",
        extra={"chunk_start": chunk.start, "chunk_end": chunk.end, "reads": len(output.lines)},
    )
    return output


def init_worker(index_path: str, params: AlignerParams) -> None:
    """Process-pool initializer: load the index once per worker process"""
    _WORKER_STATE["index"] = load_index_file(index_path)
    _WORKER_STATE["params"] = params


def align_chunk_in_worker(fastq_path: str, chunk: WorkChunk) -> ChunkOutput:
    return align_chunk(fastq_path, chunk, _WORKER_STATE["index"], _WORKER_STATE["params"])
