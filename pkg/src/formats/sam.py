"""
SAM output for alignment results

MAPPING RULES:
- SingleHit: mapped at the contig coordinate of its position, reverse flag
  for reverse-strand hits (SEQ stored reverse-complemented, QUAL reversed),
  MAPQ = min(60, 10 * gap); with no second hit the gap is its lower bound c.
- MultipleHits with a known best location: mapped there with MAPQ 0.
- MultipleHits without a location, NotFound: unmapped (flag 4, "*" fields).

The kernel computes distances, not alignment paths, so CIGAR is always
``<read length>M``; the NM tag carries the edit distance. Every record also
carries ``XR:Z:<single|multiple|not_found>``.
"""

from dataclasses import dataclass, field
from typing import Iterable, List, Optional, TextIO

from src.alignment.aligner import (
    AlignerParams,
    AlignmentResult,
    MultipleHits,
    ResultKind,
    SingleHit,
)
from src.formats.fastq import Read
from src.genome.reference import PackedGenome, reverse_complement
from src.index.seed_index import Direction

FLAG_UNMAPPED = 0x4
FLAG_REVERSE = 0x10
MAX_MAPQ = 60

PROGRAM_NAME = "snap-align"


class SamFormatError(ValueError):
    """Raised when a SAM line cannot be parsed"""

    pass


@dataclass
class SamRecord:
    """One SAM alignment line (single-end)"""

    qname: str
    flag: int
    rname: str
    pos: int
    mapq: int
    cigar: str
    seq: str
    qual: str
    tags: List[str] = field(default_factory=list)

    @property
    def is_unmapped(self) -> bool:
        return bool(self.flag & FLAG_UNMAPPED)

    @property
    def is_reverse(self) -> bool:
        return bool(self.flag & FLAG_REVERSE)

    def tag(self, name: str) -> Optional[str]:
        """Value of an optional ``NAME:TYPE:VALUE`` field"""
        prefix = f"{name}:"
        for item in self.tags:
            if item.startswith(prefix):
                return item.split(":", 2)[2]
        return None

    def to_line(self) -> str:
        fields = [
            self.qname,
            str(self.flag),
            self.rname,
            str(self.pos),
            str(self.mapq),
            self.cigar,
            "*",
            "0",
            "0",
            self.seq or "*",
            self.qual or "*",
            *self.tags,
        ]
        return "\t".join(fields)


def mapping_quality(result: AlignmentResult) -> int:
    if isinstance(result, SingleHit):
        return min(MAX_MAPQ, 10 * result.gap)
    return 0


def write_sam(result: AlignmentResult, read: Read, genome: PackedGenome) -> SamRecord:
    """Build the SAM record for ``read`` aligned with outcome ``result``"""
    kind_tag = f"XR:Z:{result.kind.value}"

    position: Optional[int] = None
    direction: Optional[Direction] = None
    distance: Optional[int] = None
    if isinstance(result, (SingleHit, MultipleHits)):
        position, direction, distance = result.position, result.direction, result.distance

    if position is None or direction is None:
        return SamRecord(
            qname=read.name,
            flag=FLAG_UNMAPPED,
            rname="*",
            pos=0,
            mapq=0,
            cigar="*",
            seq=read.bases,
            qual=read.qualities,
            tags=[kind_tag],
        )

    coordinate = genome.to_contig_coordinate(position)
    if direction is Direction.REVERSE:
        flag, seq, qual = FLAG_REVERSE, reverse_complement(read.bases), read.qualities[::-1]
    else:
        flag, seq, qual = 0, read.bases, read.qualities
    return SamRecord(
        qname=read.name,
        flag=flag,
        rname=coordinate.contig_name,
        pos=coordinate.offset_in_contig + 1,
        mapq=mapping_quality(result),
        cigar=f"{len(read)}M",
        seq=seq,
        qual=qual,
        tags=[f"NM:i:{distance}", kind_tag],
    )


def sam_header(genome: PackedGenome, params: AlignerParams, version: str) -> List[str]:
    """@HD, one @SQ per contig, and an @PG line recording the aligner parameters"""
    lines = ["@HD\tVN:1.6\tSO:unsorted"]
    lines.extend(f"@SQ\tSN:{contig.name}\tLN:{contig.length}" for contig in genome.contigs)
    settings = " ".join(f"{key}={value}" for key, value in params.model_dump().items())
    lines.append(f"@PG\tID:{PROGRAM_NAME}\tPN:{PROGRAM_NAME}\tVN:{version}\tCL:{settings}")
    return lines


def write_sam_stream(
    sink: TextIO,
    records: Iterable[SamRecord],
    header: Optional[List[str]] = None,
) -> int:
    """Write header lines (when given) and records; returns the record count"""
    if header:
        sink.write("\n".join(header) + "\n")
    count = 0
    for record in records:
        sink.write(record.to_line() + "\n")
        count += 1
    return count


def parse_sam_line(line: str) -> SamRecord:
    """Parse one alignment line (header lines are rejected)"""
    fields = line.rstrip("\r\n").split("\t")
    if line.startswith("@") or len(fields) < 11:
        raise SamFormatError(f"Not a SAM alignment line: {line[:60]!r}")
    try:
        return SamRecord(
            qname=fields[0],
            flag=int(fields[1]),
            rname=fields[2],
            pos=int(fields[3]),
            mapq=int(fields[4]),
            cigar=fields[5],
            seq=fields[9],
            qual=fields[10],
            tags=fields[11:],
        )
    except ValueError as e:
        raise SamFormatError(f"Bad numeric field in SAM line: {e}") from e


def result_kind_of(record: SamRecord) -> ResultKind:
    """Result kind from the XR tag, falling back to flag and MAPQ"""
    value = record.tag("XR")
    if value is not None:
        return ResultKind(value)
    if record.is_unmapped:
        return ResultKind.NOT_FOUND
    return ResultKind.SINGLE if record.mapq > 0 else ResultKind.MULTIPLE
