"""
FASTQ parsing and serialization

Records are the classic four lines: ``@name [description]``, bases, ``+``
(optionally repeating the name) and qualities. Parsing is streaming with
constant memory per record, and every record is reported with the byte
offset of its ``@`` line so the align job can hand out byte ranges of the
file to workers.

RECORD OWNERSHIP FOR BYTE RANGES:
A record belongs to the range containing its first byte. ``find_record_start``
moves an arbitrary offset forward to the next record start, probing the line
structure (``@`` line, then a ``+`` line two lines later, bases and qualities
of equal length) because quality strings may themselves begin with ``@``.

Bases are uppercased and any letter other than A/C/G/T becomes N.
"""

import logging
import string
from dataclasses import dataclass
from typing import BinaryIO, Iterable, Iterator, List, Optional, Tuple

from src.genome.reference import open_maybe_gzip

logger = logging.getLogger(__name__)

# Letters -> uppercase A/C/G/T or N; '.' -> N; anything else is left for validation
_BASE_TABLE = bytearray(range(256))
for _letter in string.ascii_letters + ".":
    _upper = _letter.upper()
    _BASE_TABLE[ord(_letter)] = ord(_upper) if _upper in "ACGT" else ord("N")


class FastqFormatError(ValueError):
    """Raised when a FASTQ record is malformed"""

    def __init__(self, message: str, offset: Optional[int] = None):
        self.offset = offset
        location = f"byte {offset}: " if offset is not None else ""
        super().__init__(f"{location}{message}")


@dataclass(frozen=True)
class Read:
    """
    One sequencing read

    Attributes:
        name: Read name (first token of the header line)
        bases: Bases over {A, C, G, T, N}
        qualities: Phred+33 quality string, same length as ``bases``
        description: Rest of the header line, if any
    """

    name: str
    bases: str
    qualities: str
    description: str = ""

    def __post_init__(self) -> None:
        if not self.name:
            raise ValueError("Read name must not be empty")
        if len(self.bases) != len(self.qualities):
            raise ValueError(
                f"Read {self.name}: {len(self.bases)} bases but {len(self.qualities)} qualities"
            )

    def __len__(self) -> int:
        return len(self.bases)

    def to_fastq(self) -> bytes:
        header = f"{self.name} {self.description}" if self.description else self.name
        return f"@{header}\n{self.bases}\n+\n{self.qualities}\n".encode("ascii")


def _normalize_bases(raw: bytes, offset: int) -> str:
    bases = raw.translate(_BASE_TABLE)
    stray = bases.translate(None, b"ACGTN")
    if stray:
        raise FastqFormatError(f"illegal base character {chr(stray[0])!r}", offset)
    return bases.decode("ascii")


def _parse_record(lines: List[bytes], offset: int) -> Read:
    if len(lines) < 4:
        raise FastqFormatError("truncated record", offset)
    header, sequence, separator, qualities = (line.rstrip(b"\r\n") for line in lines)

    if not header.startswith(b"@"):
        raise FastqFormatError("record does not start with '@'", offset)
    if not separator.startswith(b"+"):
        raise FastqFormatError("third line of record does not start with '+'", offset)
    if len(sequence) != len(qualities):
        raise FastqFormatError(
            f"{len(sequence)} bases but {len(qualities)} quality values", offset
        )

    fields = header[1:].decode("utf-8", errors="replace").split(maxsplit=1)
    if not fields:
        raise FastqFormatError("record has an empty name", offset)
    return Read(
        name=fields[0],
        bases=_normalize_bases(sequence, offset),
        qualities=qualities.decode("ascii", errors="replace"),
        description=fields[1] if len(fields) > 1 else "",
    )


def iter_records(
    stream: BinaryIO, start: int = 0, end: Optional[int] = None
) -> Iterator[Tuple[int, Read]]:
    """
    Yield ``(offset, read)`` for records starting in ``[start, end)``

    ``stream`` must be positioned at ``start``, which must be a record start.
    Blank lines between records are tolerated.
    """
    offset = start
    while end is None or offset < end:
        line = stream.readline()
        if not line:
            return
        if not line.strip():
            offset += len(line)
            continue
        lines = [line]
        for _ in range(3):
            nxt = stream.readline()
            if not nxt:
                break
            lines.append(nxt)
        yield offset, _parse_record(lines, offset)
        offset += sum(len(part) for part in lines)


def read_fastq(source: BinaryIO) -> Iterator[Read]:
    """Stream reads from a plain or gzip-compressed FASTQ byte stream"""
    for _, read in iter_records(open_maybe_gzip(source)):
        yield read


def _looks_like_record(lines: List[bytes]) -> bool:
    if len(lines) < 4:
        return False
    header, sequence, separator, qualities = (line.rstrip(b"\r\n") for line in lines)
    return (
        header.startswith(b"@")
        and separator.startswith(b"+")
        and len(sequence) == len(qualities)
    )


def find_record_start(handle: BinaryIO, offset: int) -> int:
    """
    First record start at or after ``offset`` (file size when there is none)

    ``handle`` must be seekable and uncompressed; its position is left
    undefined.
    """
    if offset <= 0:
        return 0
    handle.seek(offset - 1)
    if handle.read(1) != b"\n":
        # finish the partial line
        handle.readline()
    position = handle.tell()

    lines: List[bytes] = []
    while True:
        while len(lines) < 4:
            line = handle.readline()
            if not line:
                break
            lines.append(line)
        if not lines:
            return position
        if _looks_like_record(lines):
            return position
        if len(lines) < 4:
            # fewer than four lines left: no complete record can start here
            return position + sum(len(line) for line in lines)
        position += len(lines.pop(0))


def iter_fastq_range(path: str, start: int, end: int) -> Iterator[Tuple[int, Read]]:
    """Records of an uncompressed FASTQ file whose first byte lies in ``[start, end)``"""
    with open(path, "rb") as handle:
        first = find_record_start(handle, start)
        if first >= end:
            return
        handle.seek(first)
        logger.debug(
            "Reading FASTQ range",
            extra={"path": path, "chunk_start": first, "chunk_end": end},
        )
        yield from iter_records(handle, first, end)


def write_fastq(reads: Iterable[Read], sink: BinaryIO) -> int:
    """Serialize ``reads``; returns the number written"""
    written = 0
    for read in reads:
        sink.write(read.to_fastq())
        written += 1
    return written
