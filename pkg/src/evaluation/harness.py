"""
Scoring of alignment results against simulated truth

METRICS:
- aligned %: reads classified SingleHit, over all reads
- error %: confident reads placed away from their origin, over confident
  reads whose truth is known (N/A when there are none)
- throughput: reads per second of the timed alignment

A confident call is correct when it is on the truth contig and strand and its
start lies within ``tolerance`` bases of the truth start. Percentages are kept
as exact fractions; they are only rounded for display.

``oracle_align`` is the brute-force referee: it computes the distance at
every start that can possibly be within the limit and classifies with the
same locus and confidence rules as the aligner.
"""

import enum
import json
import logging
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, Iterator, List, Optional, Set, Tuple, Union

import numpy as np

from src.alignment.aligner import (
    AlignerParams,
    AlignmentResult,
    MultipleHits,
    NotFound,
    ResultKind,
    ScoredCandidate,
    SingleHit,
    classify_confidence,
    confidence_gap,
    locate_start,
    normalize_bases,
    rank_loci,
    seed_offsets,
)
from src.alignment.edit_distance import bounded_distance
from src.formats.fastq import Read
from src.formats.sam import SamRecord, result_kind_of
from src.genome.reference import PackedGenome, reverse_complement_bytes
from src.index.seed_index import Direction, SeedIndex
from src.simulation.simulator import Truth, decode_truth

logger = logging.getLogger(__name__)

DEFAULT_TOLERANCE = 50


class ScoreOutcome(str, enum.Enum):
    CORRECT = "correct"
    WRONG = "wrong"
    NOT_CONFIDENT = "not_confident"


@dataclass(frozen=True)
class AlignmentCall:
    """Where a read was placed, in contig coordinates (0-based offset)"""

    name: str
    kind: ResultKind
    contig: Optional[str] = None
    offset: Optional[int] = None
    direction: Optional[Direction] = None

    @classmethod
    def from_result(
        cls, name: str, result: AlignmentResult, genome: PackedGenome
    ) -> "AlignmentCall":
        position = getattr(result, "position", None)
        direction = getattr(result, "direction", None)
        if position is None:
            return cls(name=name, kind=result.kind)
        coordinate = genome.to_contig_coordinate(position)
        return cls(
            name=name,
            kind=result.kind,
            contig=coordinate.contig_name,
            offset=coordinate.offset_in_contig,
            direction=direction,
        )

    @classmethod
    def from_sam(cls, record: SamRecord) -> "AlignmentCall":
        kind = result_kind_of(record)
        if record.is_unmapped:
            return cls(name=record.qname, kind=kind)
        return cls(
            name=record.qname,
            kind=kind,
            contig=record.rname,
            offset=record.pos - 1,
            direction=Direction.REVERSE if record.is_reverse else Direction.FORWARD,
        )


def score_result(
    call: AlignmentCall, truth: Truth, tolerance: int = DEFAULT_TOLERANCE
) -> ScoreOutcome:
    """Correct, Wrong or NotConfident for one read with known truth"""
    if call.kind is not ResultKind.SINGLE:
        return ScoreOutcome.NOT_CONFIDENT
    if (
        call.contig == truth.contig
        and call.direction is truth.direction
        and call.offset is not None
        and abs(call.offset - truth.position) <= tolerance
    ):
        return ScoreOutcome.CORRECT
    return ScoreOutcome.WRONG


@dataclass(frozen=True)
class ScoredRead:
    """Result kind plus outcome; outcome is None when the read has no truth"""

    kind: ResultKind
    outcome: Optional[ScoreOutcome]


def score_calls(
    calls: Iterable[AlignmentCall], tolerance: int = DEFAULT_TOLERANCE
) -> Iterator[ScoredRead]:
    """Score calls using the truth encoded in their read names"""
    for call in calls:
        truth = decode_truth(call.name)
        outcome = score_result(call, truth, tolerance) if truth is not None else None
        yield ScoredRead(kind=call.kind, outcome=outcome)


def _percent(part: int, whole: int) -> Fraction:
    return Fraction(100 * part, whole)


@dataclass
class EvalReport:
    """
    Accuracy and speed summary for one run

    ``aligned_fraction``, ``multiple_fraction`` and ``not_found_fraction`` are
    exact percentages summing to 100. ``error_fraction`` is None when no
    confident read had truth.
    """

    total_reads: int
    single_hits: int
    multiple_hits: int
    not_found: int
    correct: int
    wrong: int
    confident_without_truth: int
    elapsed_seconds: Optional[float] = None
    counters: Dict[str, Union[int, float, None]] = field(default_factory=dict)

    @property
    def aligned_fraction(self) -> Fraction:
        return _percent(self.single_hits, self.total_reads)

    @property
    def multiple_fraction(self) -> Fraction:
        return _percent(self.multiple_hits, self.total_reads)

    @property
    def not_found_fraction(self) -> Fraction:
        return _percent(self.not_found, self.total_reads)

    @property
    def error_fraction(self) -> Optional[Fraction]:
        judged = self.correct + self.wrong
        if judged == 0:
            return None
        return _percent(self.wrong, judged)

    @property
    def throughput(self) -> Optional[float]:
        if not self.elapsed_seconds:
            return None
        return self.total_reads / self.elapsed_seconds

    def to_dict(self) -> Dict[str, object]:
        error = self.error_fraction
        return {
            "total_reads": self.total_reads,
            "single_hits": self.single_hits,
            "multiple_hits": self.multiple_hits,
            "not_found": self.not_found,
            "correct": self.correct,
            "wrong": self.wrong,
            "confident_without_truth": self.confident_without_truth,
            "aligned_pct": float(self.aligned_fraction),
            "multiple_pct": float(self.multiple_fraction),
            "not_found_pct": float(self.not_found_fraction),
            "error_pct": None if error is None else float(error),
            "elapsed_seconds": self.elapsed_seconds,
            "reads_per_second": self.throughput,
            "counters": dict(self.counters),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        error = self.error_fraction
        throughput = self.throughput
        lines = [
            f"reads                {self.total_reads}",
            f"aligned %            {float(self.aligned_fraction):.2f}",
            f"multiple hits %      {float(self.multiple_fraction):.2f}",
            f"not found %          {float(self.not_found_fraction):.2f}",
            f"error %              {'N/A' if error is None else f'{float(error):.2f}'}",
            f"correct / wrong      {self.correct} / {self.wrong}",
            f"reads/s              {'N/A' if throughput is None else f'{throughput:.0f}'}",
        ]
        for key in sorted(self.counters):
            value = self.counters[key]
            if value is None:
                shown = "N/A"
            else:
                shown = f"{value:.4f}" if isinstance(value, float) else str(value)
            lines.append(f"{key:<28} {shown}")
        return "\n".join(lines)


@dataclass
class ScoreTally:
    """
    Per-kind and per-outcome read counts

    Tallies from separate chunks or workers merge associatively, so a run
    never holds more than one tally per chunk in flight.
    """

    kinds: "Counter[ResultKind]" = field(default_factory=Counter)
    outcomes: "Counter[ScoreOutcome]" = field(default_factory=Counter)
    without_truth: int = 0

    @property
    def total(self) -> int:
        return sum(self.kinds.values())

    def add(self, item: ScoredRead) -> None:
        self.kinds[item.kind] += 1
        if item.outcome is not None:
            self.outcomes[item.outcome] += 1
        elif item.kind is ResultKind.SINGLE:
            self.without_truth += 1

    def merge(self, other: "ScoreTally") -> None:
        self.kinds.update(other.kinds)
        self.outcomes.update(other.outcomes)
        self.without_truth += other.without_truth

    def to_report(
        self,
        elapsed_seconds: Optional[float] = None,
        counters: Optional[Dict[str, Union[int, float, None]]] = None,
    ) -> EvalReport:
        """
        Raises:
            ValueError: no reads
        """
        total = self.total
        if total == 0:
            raise ValueError("Cannot compile a report over zero reads")
        report = EvalReport(
            total_reads=total,
            single_hits=self.kinds[ResultKind.SINGLE],
            multiple_hits=self.kinds[ResultKind.MULTIPLE],
            not_found=self.kinds[ResultKind.NOT_FOUND],
            correct=self.outcomes[ScoreOutcome.CORRECT],
            wrong=self.outcomes[ScoreOutcome.WRONG],
            confident_without_truth=self.without_truth,
            elapsed_seconds=elapsed_seconds,
            counters=dict(counters or {}),
        )
        if report.error_fraction is None:
            logger.warning("No confident read with known truth; error % is N/A")
        return report


def compile_report(
    scored: Iterable[ScoredRead],
    elapsed_seconds: Optional[float] = None,
    counters: Optional[Dict[str, Union[int, float, None]]] = None,
) -> EvalReport:
    """
    Reduce scored reads to an EvalReport

    Raises:
        ValueError: no reads
    """
    tally = ScoreTally()
    for item in scored:
        tally.add(item)
    return tally.to_report(elapsed_seconds, counters)


def _start_ranges(read: bytes, genome: PackedGenome, d_limit: int) -> List[Tuple[int, int]]:
    """
    Disjoint inclusive ranges holding every start that can align within d_limit

    Pigeonhole filter: with at most d_limit edits one of d_limit + 1 disjoint
    read pieces matches exactly, so the start lies within d_limit of the
    start implied by an exact piece hit.
    """
    n = len(read)
    length = genome.total_length
    piece = n // (d_limit + 1)
    if piece == 0:
        return [(0, length - 1)] if length else []

    implied: Set[int] = set()
    sequence = genome.sequence
    for number in range(d_limit + 1):
        offset = number * piece
        chunk = read[offset : offset + piece]
        if b"N" in chunk:
            continue
        found = sequence.find(chunk)
        while found != -1:
            implied.add(found - offset)
            found = sequence.find(chunk, found + 1)

    ranges: List[Tuple[int, int]] = []
    for start in sorted(implied):
        low = max(start - d_limit, 0)
        high = min(start + d_limit, length - 1)
        if low > high:
            continue
        if ranges and low <= ranges[-1][1] + 1:
            ranges[-1] = (ranges[-1][0], max(ranges[-1][1], high))
        else:
            ranges.append((low, high))
    return ranges


def oracle_candidates(
    read: Union[str, bytes, Read], genome: PackedGenome, d_limit: int
) -> List[ScoredCandidate]:
    """
    Best start of every filtered range, on either strand, within ``d_limit``

    Ranges are cut into tiles of at most 2 * d_limit + 1 starts and each tile
    costs one kernel call with a free start over the tile.
    """
    forward = normalize_bases(read)
    candidates: List[ScoredCandidate] = []
    strands: Tuple[Tuple[Direction, bytes], ...] = (
        (Direction.FORWARD, forward),
        (Direction.REVERSE, reverse_complement_bytes(forward)),
    )
    tile = 2 * d_limit + 1
    for direction, bases in strands:
        for low, high in _start_ranges(bases, genome, d_limit):
            for first in range(low, high + 1, tile):
                slack = min(first + tile - 1, high) - first
                window = genome.window(first, len(bases) + d_limit + slack)
                distance = bounded_distance(bases, window, d_limit, slack)
                if distance is None:
                    continue
                offset = locate_start(bases, window, distance, slack, 0)
                candidates.append(ScoredCandidate(first + offset, direction, distance))
    return candidates


def oracle_align(
    read: Union[str, bytes, Read],
    genome: PackedGenome,
    d_max: int,
    c: int,
    bucket_size: int = AlignerParams().bucket_size,
) -> AlignmentResult:
    """
    Exhaustive-scan classification of ``read``

    Distances are computed up to d_max + c - 1, the largest value that can
    influence the outcome.
    """
    candidates = oracle_candidates(read, genome, d_max + c - 1)
    return _classify(candidates, d_max, c, bucket_size)


def _classify(
    candidates: List[ScoredCandidate], d_max: int, c: int, bucket_size: int
) -> AlignmentResult:
    best, d_best, d_second = rank_loci(candidates, bucket_size)
    kind = classify_confidence(d_best, d_second, d_max, c)
    if kind is ResultKind.SINGLE and best is not None:
        gap = confidence_gap(d_best, d_second, c)
        return SingleHit(best.position, best.direction, int(d_best), gap)
    if kind is ResultKind.MULTIPLE and best is not None:
        return MultipleHits(best.position, best.direction, int(d_best))
    return NotFound()


@dataclass(frozen=True)
class OracleAudit:
    """
    Oracle answer for one read plus what the aligner's seeds could see

    ``unreached`` counts oracle loci able to decide the outcome (distance
    below d_best + c) that no looked-up seed points at. ``saturated`` counts
    scheduled seeds skipped for exceeding ``max_hits``.
    """

    expected: AlignmentResult
    unreached: int
    saturated: int

    @property
    def seeds_explain_miss(self) -> bool:
        return self.unreached > 0 or self.saturated > 0


def _seed_starts(
    bases: bytes, index: SeedIndex, params: AlignerParams
) -> Tuple[List[Tuple[Direction, np.ndarray]], int]:
    """Implied starts of every looked-up scheduled seed, and the saturated seed count"""
    n = len(bases)
    s = params.seed_size
    starts: List[Tuple[Direction, np.ndarray]] = []
    saturated = 0
    for offset in seed_offsets(n, s, params.seeds_to_try):
        seed = bases[offset : offset + s]
        if b"N" in seed:
            continue
        forward_hits, reverse_hits = index.lookup_bytes(seed)
        if forward_hits.size + reverse_hits.size > params.max_hits:
            saturated += 1
            continue
        starts.append((Direction.FORWARD, forward_hits.astype(np.int64) - offset))
        starts.append((Direction.REVERSE, reverse_hits.astype(np.int64) - (n - s - offset)))
    return starts, saturated


def audit_read(
    read: Union[str, bytes, Read],
    index: SeedIndex,
    genome: PackedGenome,
    params: AlignerParams,
) -> OracleAudit:
    """
    Oracle classification of ``read`` and seed coverage of its deciding loci

    Seeds are taken from the orientation the aligner uses; a locus is reached
    when a seed implies a start within ``anchor_slack`` of it on its strand.
    """
    bases = normalize_bases(read)
    d_max = params.max_distance_for(len(bases))
    c = params.confidence_threshold
    candidates = oracle_candidates(bases, genome, d_max + c - 1)
    expected = _classify(candidates, d_max, c, params.bucket_size)

    flipped = reverse_complement_bytes(bases)
    canonical = min(bases, flipped)
    starts, saturated = _seed_starts(canonical, index, params)
    _, d_best, _ = rank_loci(candidates, params.bucket_size)

    unreached = 0
    for cand in candidates:
        if cand.distance is None or cand.distance >= d_best + c:
            continue
        direction = cand.direction if canonical == bases else cand.direction.flipped()
        reached = any(
            bool(np.any(np.abs(implied - cand.position) <= params.anchor_slack))
            for strand, implied in starts
            if strand is direction
        )
        if not reached:
            unreached += 1
    return OracleAudit(expected=expected, unreached=unreached, saturated=saturated)
