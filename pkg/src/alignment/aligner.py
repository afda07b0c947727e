"""
Seed-and-extend alignment of a single read

For each read the aligner looks up a fixed schedule of seeds, votes for
candidate start positions, and scores candidates with the bounded edit
distance kernel one at a time, lowering the distance limit as the best and
second-best scores become known.

PIPELINE PER READ:
0. The read and its reverse complement are ordered bytewise and the smaller
   one is aligned; the strand of the result is flipped back when needed. Both
   orientations of a read therefore try the same seeds and get the same call.
1. Seeds are drawn in ``seed_offsets`` order. Seeds containing N are skipped;
   seeds with more than ``max_hits`` index entries are skipped and remembered.
2. Every hit votes for an anchor (the implied read start on the forward
   strand). Anchors are grouped in buckets of ``bucket_size`` positions per
   strand; a bucket keeps the first anchor it saw.
3. After each looked-up seed the unscored bucket with the most votes is scored
   (ties: lowest anchor, forward first) with a limit chosen from the current
   best and second-best distances.
4. Two early exits: ambiguous (two close hits below the confidence threshold)
   and pruning (enough non-overlapping seeds were tested that any location not
   yet seen has too high a distance; remaining buckets are scored and the
   seed loop ends).
5. The final classification is SingleHit, MultipleHits or NotFound.

SCORING WINDOW:
A bucket is scored against the reference starting ``anchor_slack`` bases
before its anchor with ``start_slack = 2 * anchor_slack``, so an anchor
shifted by an indel in front of the first matching seed still scores the true
start. Reverse-strand buckets align the reverse complement of the read.

LOCI:
Scored candidates on the same strand less than ``bucket_size`` apart are one
locus; only the better one counts towards best/second-best.
"""

import enum
import math
from dataclasses import asdict, dataclass, field, replace
from typing import Dict, List, Optional, Sequence, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field

from src.alignment.edit_distance import KernelCounters, bounded_distance
from src.formats.fastq import Read
from src.genome.reference import PackedGenome, reverse_complement_bytes
from src.index.seed_index import MAX_SEED_SIZE, Direction, SeedIndex

INFINITE = math.inf

# Everything outside A/C/G/T is treated as N
_READ_TABLE = bytes(
    b if b in b"ACGT" else (b - 32 if b in b"acgt" else ord("N")) for b in range(256)
)


class AlignerParams(BaseModel):
    """
    Tunable aligner parameters

    Attributes:
        seed_size: Seed length s (must equal the index seed size)
        seeds_to_try: Seeds looked up per read (n)
        max_distance: Largest reportable edit distance; None means 12% of the
            read length, rounded up
        confidence_threshold: Required gap between best and second-best (c)
        max_hits: Seeds with more index entries are ignored (h_max)
        bucket_size: Width of a candidate bucket in positions
        anchor_slack: Bases scored on either side of a bucket's anchor
        seeds_before_scoring: Seeds looked up before the first candidate is scored
        force_max_limit: Always score with d_max + c - 1 (diagnostic)
    """

    model_config = ConfigDict(frozen=True)

    seed_size: int = Field(default=20, ge=1, le=MAX_SEED_SIZE)
    seeds_to_try: int = Field(default=25, ge=1)
    max_distance: Optional[int] = Field(default=None, ge=0)
    confidence_threshold: int = Field(default=2, ge=1)
    max_hits: int = Field(default=300, ge=1)
    bucket_size: int = Field(default=32, ge=1)
    anchor_slack: int = Field(default=4, ge=0)
    seeds_before_scoring: int = Field(default=1, ge=1)
    force_max_limit: bool = False

    def max_distance_for(self, read_length: int) -> int:
        if self.max_distance is not None:
            return self.max_distance
        return (12 * read_length + 99) // 100


class ResultKind(str, enum.Enum):
    """Classification of one read"""

    SINGLE = "single"
    MULTIPLE = "multiple"
    NOT_FOUND = "not_found"


@dataclass(frozen=True)
class SingleHit:
    """
    Confident alignment

    ``gap`` is d_second - d_best. When no second locus was scored within the
    distance limit only its lower bound, the confidence threshold, is known.
    """

    position: int
    direction: Direction
    distance: int
    gap: int

    @property
    def kind(self) -> ResultKind:
        return ResultKind.SINGLE


@dataclass(frozen=True)
class MultipleHits:
    """Ambiguous read; the best location is kept when one was scored within d_max"""

    position: Optional[int] = None
    direction: Optional[Direction] = None
    distance: Optional[int] = None

    @property
    def kind(self) -> ResultKind:
        return ResultKind.MULTIPLE


@dataclass(frozen=True)
class NotFound:
    @property
    def kind(self) -> ResultKind:
        return ResultKind.NOT_FOUND


AlignmentResult = Union[SingleHit, MultipleHits, NotFound]


@dataclass
class AlignmentStats:
    """
    Per-worker counters, merged associatively across workers

    ``calls_after_first`` / ``early_returns_after_first`` measure how often a
    distance call after a read's first one stops at its limit;
    ``first_scored_best`` counts reads whose first scored candidate ended up
    as the best.
    """

    reads: int = 0
    single_hits: int = 0
    multiple_hits: int = 0
    not_found: int = 0
    short_reads: int = 0
    reads_scored: int = 0
    distance_calls: int = 0
    calls_after_first: int = 0
    early_returns_after_first: int = 0
    first_scored_best: int = 0
    multiple_hits_early_exits: int = 0
    pruning_exits: int = 0
    seeds_skipped_n: int = 0
    seeds_skipped_max_hits: int = 0
    cells: int = 0

    def merge(self, other: "AlignmentStats") -> None:
        for name, value in asdict(other).items():
            setattr(self, name, getattr(self, name) + value)

    def record(self, result: AlignmentResult) -> None:
        self.reads += 1
        if result.kind is ResultKind.SINGLE:
            self.single_hits += 1
        elif result.kind is ResultKind.MULTIPLE:
            self.multiple_hits += 1
        else:
            self.not_found += 1

    @property
    def early_return_rate(self) -> Optional[float]:
        if not self.calls_after_first:
            return None
        return self.early_returns_after_first / self.calls_after_first

    @property
    def first_candidate_best_rate(self) -> Optional[float]:
        if not self.reads_scored:
            return None
        return self.first_scored_best / self.reads_scored

    def to_dict(self) -> Dict[str, Union[int, float, None]]:
        counters: Dict[str, Union[int, float, None]] = dict(asdict(self))
        counters["early_return_rate"] = self.early_return_rate
        counters["first_candidate_best_rate"] = self.first_candidate_best_rate
        return counters


@dataclass(frozen=True)
class ScoredCandidate:
    """A location whose distance was computed (None: above the limit used)"""

    position: int
    direction: Direction
    distance: Optional[int]


@dataclass
class _Bucket:
    anchor: int
    direction: Direction
    seeds_hitting: int = 0
    scored: bool = False


@dataclass
class CandidateSet:
    """
    Per-read candidate bookkeeping

    Buckets are keyed by ``(anchor // bucket_size, direction)``.
    """

    bucket_size: int
    buckets: Dict[Tuple[int, Direction], _Bucket] = field(default_factory=dict)
    scored: List[ScoredCandidate] = field(default_factory=list)
    tested_offsets: List[int] = field(default_factory=list)

    def add_hit(self, anchor: int, direction: Direction) -> None:
        anchor = max(anchor, 0)
        key = (anchor // self.bucket_size, direction)
        bucket = self.buckets.get(key)
        if bucket is None:
            bucket = self.buckets[key] = _Bucket(anchor=anchor, direction=direction)
        bucket.seeds_hitting += 1

    def next_unscored(self) -> Optional[_Bucket]:
        """Unscored bucket with the most seeds hitting (lowest anchor, forward first on ties)"""
        chosen: Optional[_Bucket] = None
        for bucket in self.buckets.values():
            if bucket.scored:
                continue
            if chosen is None or _bucket_order(bucket) < _bucket_order(chosen):
                chosen = bucket
        return chosen

    def non_overlapping_seeds(self, seed_size: int) -> int:
        """Largest set of pairwise non-overlapping tested seeds"""
        count = 0
        free_from = -1
        for offset in sorted(set(self.tested_offsets)):
            if offset >= free_from:
                count += 1
                free_from = offset + seed_size
        return count

    def best_two(self) -> Tuple[Optional[ScoredCandidate], float, float]:
        return rank_loci(self.scored, self.bucket_size)


def _bucket_order(bucket: _Bucket) -> Tuple[int, int, str]:
    return (-bucket.seeds_hitting, bucket.anchor, bucket.direction.value)


def rank_loci(
    candidates: Sequence[ScoredCandidate], bucket_size: int
) -> Tuple[Optional[ScoredCandidate], float, float]:
    """
    Best candidate plus d_best and d_second over distinct loci

    Candidates on the same strand less than ``bucket_size`` from the best are
    the best's own locus and never count as second-best.
    """
    ranked = sorted(
        (cand for cand in candidates if cand.distance is not None),
        key=lambda cand: (cand.distance, cand.position, cand.direction.value),
    )
    if not ranked:
        return None, INFINITE, INFINITE
    best = ranked[0]
    for cand in ranked[1:]:
        same_locus = (
            cand.direction is best.direction and abs(cand.position - best.position) < bucket_size
        )
        if not same_locus:
            return best, float(best.distance), float(cand.distance)  # type: ignore[arg-type]
    return best, float(best.distance), INFINITE  # type: ignore[arg-type]


def seed_offsets(read_length: int, seed_size: int, count: int) -> List[int]:
    """
    Read offsets of the seeds to try, in lookup order

    First every non-overlapping seed from offset 0, then the same grid shifted
    by s/2, then s/4 and 3s/4, then the odd eighths, and so on. Offsets past
    ``read_length - seed_size`` are dropped and duplicates skipped.

    >>> seed_offsets(100, 20, 9)
    [0, 20, 40, 60, 80, 10, 30, 50, 70]
    """
    last = read_length - seed_size
    if last < 0 or count <= 0:
        return []

    offsets: List[int] = []
    seen = set()

    def take_grid(shift: int) -> bool:
        for offset in range(shift, last + 1, seed_size):
            if offset not in seen:
                seen.add(offset)
                offsets.append(offset)
                if len(offsets) == count:
                    return True
        return False

    if take_grid(0):
        return offsets
    denominator = 2
    # Once the denominator passes 2s every shift in [0, s) has been produced
    while denominator <= 2 * seed_size:
        for numerator in range(1, denominator, 2):
            if take_grid(numerator * seed_size // denominator):
                return offsets
        denominator *= 2
    return offsets


def classify_confidence(d_best: float, d_second: float, d_max: int, c: int) -> ResultKind:
    """SingleHit, MultipleHits or NotFound from the two best distances"""
    if d_best > d_max:
        return ResultKind.NOT_FOUND
    if d_second >= d_best + c:
        return ResultKind.SINGLE
    return ResultKind.MULTIPLE


def confidence_gap(d_best: float, d_second: float, c: int) -> int:
    """d_second - d_best, or c when no second locus was seen"""
    if d_second == INFINITE:
        return c
    return int(d_second - d_best)


def distance_limit(d_best: float, d_second: float, d_max: int, c: int) -> int:
    """Largest distance that can still change the outcome"""
    if d_best > d_max:
        return d_max + c - 1
    if d_second >= d_best + c:
        return int(d_best) + c - 1
    return int(d_best) - 1


def normalize_bases(read: Union[str, bytes, Read]) -> bytes:
    bases = read.bases if isinstance(read, Read) else read
    if isinstance(bases, str):
        bases = bases.encode("ascii", errors="replace")
    return bases.translate(_READ_TABLE)


def locate_start(read: bytes, window: bytes, distance: int, start_slack: int, anchor: int) -> int:
    """Window offset, nearest the anchor, at which ``read`` aligns with ``distance`` edits"""
    for start in sorted(range(start_slack + 1), key=lambda k: (abs(k - anchor), k)):
        if bounded_distance(read, window[start:], distance) is not None:
            return start
    return anchor


class _ReadAligner:
    """State for aligning one read; never shared between reads"""

    def __init__(
        self,
        bases: bytes,
        index: SeedIndex,
        genome: PackedGenome,
        params: AlignerParams,
        stats: AlignmentStats,
    ):
        self.forward = bases
        self.reverse = reverse_complement_bytes(bases)
        self.index = index
        self.genome = genome
        self.params = params
        self.stats = stats
        self.d_max = params.max_distance_for(len(bases))
        self.c = params.confidence_threshold
        self.candidates = CandidateSet(bucket_size=params.bucket_size)
        self.d_best: float = INFINITE
        self.d_second: float = INFINITE
        self.first_scored: Optional[ScoredCandidate] = None
        self.counters = KernelCounters()

    def score(self, bucket: _Bucket) -> None:
        if self.params.force_max_limit:
            d_limit = self.d_max + self.c - 1
        else:
            d_limit = distance_limit(self.d_best, self.d_second, self.d_max, self.c)
        if d_limit < 0:
            return
        bucket.scored = True

        read = self.forward if bucket.direction is Direction.FORWARD else self.reverse
        slack = self.params.anchor_slack
        window_start = max(bucket.anchor - slack, 0)
        anchor_in_window = bucket.anchor - window_start
        start_slack = anchor_in_window + slack
        window = self.genome.window(window_start, len(read) + d_limit + start_slack)

        distance = bounded_distance(read, window, d_limit, start_slack, self.counters)
        self.stats.distance_calls += 1
        if self.first_scored is not None:
            self.stats.calls_after_first += 1
            if distance is None:
                self.stats.early_returns_after_first += 1

        position = bucket.anchor
        if distance is not None:
            position = window_start + locate_start(
                read, window, distance, start_slack, anchor_in_window
            )
        candidate = ScoredCandidate(position, bucket.direction, distance)
        if self.first_scored is None:
            self.first_scored = candidate
        self.candidates.scored.append(candidate)
        _, self.d_best, self.d_second = self.candidates.best_two()

    def run(self) -> AlignmentResult:
        params = self.params
        read_length = len(self.forward)
        offsets = seed_offsets(read_length, params.seed_size, params.seeds_to_try)
        if not offsets:
            self.stats.short_reads += 1
            return NotFound()

        looked_up = 0
        saturated = 0
        for seed_number, offset in enumerate(offsets, start=1):
            seed = self.forward[offset : offset + params.seed_size]
            if b"N" in seed:
                self.stats.seeds_skipped_n += 1
                continue
            forward_hits, reverse_hits = self.index.lookup_bytes(seed)
            if forward_hits.size + reverse_hits.size > params.max_hits:
                self.stats.seeds_skipped_max_hits += 1
                saturated += 1
                continue

            looked_up += 1
            self.candidates.tested_offsets.append(offset)
            rc_offset = read_length - params.seed_size - offset
            for hit in forward_hits.tolist():
                self.candidates.add_hit(hit - offset, Direction.FORWARD)
            for hit in reverse_hits.tolist():
                self.candidates.add_hit(hit - rc_offset, Direction.REVERSE)

            if looked_up < params.seeds_before_scoring and seed_number < len(offsets):
                continue

            bucket = self.candidates.next_unscored()
            if bucket is not None:
                self.score(bucket)

            if self.d_best < self.c and self.d_second < self.d_best + self.c:
                self.stats.multiple_hits_early_exits += 1
                return self.finish(ResultKind.MULTIPLE)

            tested = self.candidates.non_overlapping_seeds(params.seed_size)
            if tested >= self.d_best + self.c:
                self.stats.pruning_exits += 1
                self.score_remaining()
                break

        kind = classify_confidence(self.d_best, self.d_second, self.d_max, self.c)
        if kind is ResultKind.NOT_FOUND and saturated and not looked_up:
            kind = ResultKind.MULTIPLE
        return self.finish(kind)

    def score_remaining(self) -> None:
        while True:
            bucket = self.candidates.next_unscored()
            if bucket is None:
                return
            before = len(self.candidates.scored)
            self.score(bucket)
            if len(self.candidates.scored) == before:
                # limit went negative; nothing left can change the outcome
                return

    def finish(self, kind: ResultKind) -> AlignmentResult:
        self.stats.cells += self.counters.cells
        best, _, _ = self.candidates.best_two()
        if self.first_scored is not None:
            self.stats.reads_scored += 1
            if best is not None and best == self.first_scored:
                self.stats.first_scored_best += 1

        if kind is ResultKind.SINGLE and best is not None:
            gap = confidence_gap(self.d_best, self.d_second, self.c)
            return SingleHit(best.position, best.direction, int(self.d_best), gap)
        if kind is ResultKind.MULTIPLE:
            if best is not None and self.d_best <= self.d_max:
                return MultipleHits(best.position, best.direction, int(self.d_best))
            return MultipleHits()
        return NotFound()


def align_read(
    read: Union[str, bytes, Read],
    index: SeedIndex,
    genome: PackedGenome,
    params: AlignerParams,
    stats: Optional[AlignmentStats] = None,
) -> AlignmentResult:
    """
    Align one read against ``genome`` using ``index``

    Args:
        read: Read bases or a Read record
        index: Seed index over ``genome``
        genome: Reference the index was built over
        params: Aligner parameters; ``seed_size`` must match the index
        stats: Optional counters, updated in place

    Raises:
        ValueError: seed size differs from the index seed size
    """
    if index.seed_size != params.seed_size:
        raise ValueError(
            f"Aligner seed size {params.seed_size} != index seed size {index.seed_size}"
        )
    counters = stats if stats is not None else AlignmentStats()
    bases = normalize_bases(read)
    flipped = reverse_complement_bytes(bases)
    if flipped < bases:
        result = _flip_strand(_ReadAligner(flipped, index, genome, params, counters).run())
    else:
        result = _ReadAligner(bases, index, genome, params, counters).run()
    counters.record(result)
    return result


def _flip_strand(result: AlignmentResult) -> AlignmentResult:
    """Result for the reverse complement of the read that produced ``result``"""
    if isinstance(result, SingleHit):
        return replace(result, direction=result.direction.flipped())
    if isinstance(result, MultipleHits) and result.direction is not None:
        return replace(result, direction=result.direction.flipped())
    return result
