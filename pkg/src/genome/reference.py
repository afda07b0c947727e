"""
Reference genome loading and packed representation

The reference is read once from FASTA, normalized to the five-letter alphabet
{A, C, G, T, N} and kept immutable for the lifetime of a job, so index
builders, aligner workers and the SAM writer can share one instance without
locking.

NORMALIZATION RULES:
- Case-insensitive: soft-masked (lowercase) bases are uppercased.
- Every IUPAC code other than A/C/G/T (R, Y, K, M, S, W, B, D, H, V, N, U)
  becomes N. N mismatches every base during alignment.
- Whitespace inside sequence lines is dropped.
- Anything else is a parse error reporting the 1-based line number.

Contigs are concatenated in file order into one global coordinate space;
``to_contig_coordinate`` maps a global position back to (contig, offset).
"""

import bisect
import gzip
import hashlib
import io
import logging
from dataclasses import dataclass, field
from typing import BinaryIO, List, Tuple

import numpy as np

logger = logging.getLogger(__name__)

BASES = "ACGTN"
UNKNOWN_BASE = ord("N")

# Base -> 2-bit code for A/C/G/T; N gets 4
BASE_CODES = np.full(256, 4, dtype=np.uint8)
for _code, _base in enumerate("ACGT"):
    BASE_CODES[ord(_base)] = _code

_IUPAC = b"ACGTURYKMSWBDHVN"
_FASTA_TABLE = bytes.maketrans(
    _IUPAC + _IUPAC.lower(),
    (b"ACGT" + b"N" * (len(_IUPAC) - 4)) * 2,
)
_VALID_FASTA_BYTES = _IUPAC + _IUPAC.lower()

_COMPLEMENT = str.maketrans("ACGTN", "TGCAN")
_COMPLEMENT_BYTES = bytes.maketrans(b"ACGTN", b"TGCAN")


class FastaFormatError(ValueError):
    """Raised when a FASTA file cannot be parsed"""

    def __init__(self, message: str, line_number: int = 0):
        self.line_number = line_number
        location = f"line {line_number}: " if line_number else ""
        super().__init__(f"{location}{message}")


class GenomeRangeError(IndexError):
    """Raised when a global position lies outside the genome"""

    pass


class InvalidBaseError(ValueError):
    """Raised when a sequence contains a character outside {A,C,G,T,N}"""

    pass


@dataclass(frozen=True)
class Contig:
    """One named sequence inside the concatenated reference"""

    name: str
    start: int
    length: int

    @property
    def end(self) -> int:
        return self.start + self.length


@dataclass(frozen=True)
class ContigCoordinate:
    """Position expressed relative to a contig (0-based)"""

    contig_name: str
    offset_in_contig: int


@dataclass(frozen=True)
class PackedGenome:
    """
    Immutable reference sequence with a contig table

    ``sequence`` holds one uppercase ASCII byte per base (A, C, G, T or N).
    ``codes()`` exposes the same data as a numpy array of 2-bit codes with N
    as 4, which is what the index builder consumes.
    """

    sequence: bytes = field(repr=False)
    contigs: Tuple[Contig, ...]
    _starts: List[int] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        expected = 0
        for contig in self.contigs:
            if contig.start != expected or contig.length <= 0:
                raise ValueError(f"Contig table does not tile the genome at {contig.name}")
            expected = contig.end
        if expected != len(self.sequence):
            raise ValueError("Contig table does not cover the whole sequence")
        object.__setattr__(self, "_starts", [c.start for c in self.contigs])

    @property
    def total_length(self) -> int:
        return len(self.sequence)

    def codes(self) -> np.ndarray:
        """Per-position base codes (A=0, C=1, G=2, T=3, N=4)"""
        return BASE_CODES[np.frombuffer(self.sequence, dtype=np.uint8)]

    def window(self, pos: int, length: int) -> bytes:
        """Raw bytes of ``[pos, pos + length)`` clipped to the genome; never raises"""
        pos = max(pos, 0)
        return self.sequence[pos : pos + length]

    def substring(self, pos: int, length: int) -> str:
        """
        Bases starting at ``pos``

        Returns ``min(length, total_length - pos)`` bases; callers near the
        end of the genome receive a truncated string.
        """
        if pos < 0 or pos >= self.total_length:
            raise GenomeRangeError(f"Position {pos} outside genome of length {self.total_length}")
        return self.sequence[pos : pos + length].decode("ascii")

    def to_contig_coordinate(self, pos: int) -> ContigCoordinate:
        """Map a global position to its contig and 0-based offset"""
        if pos < 0 or pos >= self.total_length:
            raise GenomeRangeError(f"Position {pos} outside genome of length {self.total_length}")
        contig = self.contigs[bisect.bisect_right(self._starts, pos) - 1]
        return ContigCoordinate(contig.name, pos - contig.start)

    def contig(self, name: str) -> Contig:
        for contig in self.contigs:
            if contig.name == name:
                return contig
        raise KeyError(name)

    def to_global(self, contig_name: str, offset: int) -> int:
        """Inverse of ``to_contig_coordinate``"""
        contig = self.contig(contig_name)
        if offset < 0 or offset >= contig.length:
            raise GenomeRangeError(f"Offset {offset} outside contig {contig_name}")
        return contig.start + offset

    def checksum(self) -> bytes:
        """SHA-256 over the contig table and the sequence"""
        digest = hashlib.sha256()
        for contig in self.contigs:
            digest.update(f"{contig.name}\t{contig.length}\n".encode("utf-8"))
        digest.update(self.sequence)
        return digest.digest()


def open_maybe_gzip(source: BinaryIO) -> BinaryIO:
    """Wrap ``source`` in a gzip reader when it starts with the gzip magic bytes"""
    if isinstance(source, io.BufferedReader):
        buffered = source
    else:
        buffered = io.BufferedReader(source)  # type: ignore[arg-type]
    if buffered.peek(2)[:2] == b"\x1f\x8b":
        return gzip.GzipFile(fileobj=buffered)  # type: ignore[return-value]
    return buffered  # type: ignore[return-value]


def load_fasta(source: BinaryIO) -> PackedGenome:
    """
    Parse a FASTA byte stream into a PackedGenome

    Args:
        source: Binary stream (plain or gzip-compressed FASTA)

    Returns:
        PackedGenome with contigs concatenated in file order

    Raises:
        FastaFormatError: empty input, sequence before the first header,
            or a character that is neither IUPAC nor whitespace
    """
    stream = open_maybe_gzip(source)

    names: List[str] = []
    lengths: List[int] = []
    chunks: List[bytes] = []
    current_length = 0

    for line_number, raw_line in enumerate(stream, start=1):
        line = raw_line.strip()
        if not line:
            continue

        if line.startswith(b">"):
            if names:
                lengths.append(current_length)
            header = line[1:].split()
            if not header:
                raise FastaFormatError("header without a name", line_number)
            names.append(header[0].decode("utf-8", errors="replace"))
            current_length = 0
            continue

        if not names:
            raise FastaFormatError("sequence line before any header", line_number)

        bases = b"".join(line.split())
        illegal = bases.translate(None, _VALID_FASTA_BYTES)
        if illegal:
            raise FastaFormatError(
                f"illegal character {chr(illegal[0])!r} in sequence", line_number
            )
        chunks.append(bases.translate(_FASTA_TABLE))
        current_length += len(bases)

    if not names:
        raise FastaFormatError("empty FASTA input")
    lengths.append(current_length)

    contigs: List[Contig] = []
    offset = 0
    for name, length in zip(names, lengths):
        if length == 0:
            logger.warning(f"Skipping empty contig {name}", extra={"contig": name})
            continue
        contigs.append(Contig(name=name, start=offset, length=length))
        offset += length

    if not contigs:
        raise FastaFormatError("FASTA input contains no bases")

    genome = PackedGenome(sequence=b"".join(chunks), contigs=tuple(contigs))
    logger.info(
        f"Loaded reference: {len(contigs)} contigs, {genome.total_length} bases",
        extra={"records": len(contigs)},
    )
    return genome


def reverse_complement(sequence: str) -> str:
    """Reverse complement over {A,C,G,T,N}; raises InvalidBaseError otherwise"""
    if sequence.strip(BASES):
        bad = next(ch for ch in sequence if ch not in BASES)
        raise InvalidBaseError(f"Invalid base {bad!r} in sequence")
    return sequence.translate(_COMPLEMENT)[::-1]


def reverse_complement_bytes(sequence: bytes) -> bytes:
    """Unchecked reverse complement for already-normalized byte strings"""
    return sequence.translate(_COMPLEMENT_BYTES)[::-1]
