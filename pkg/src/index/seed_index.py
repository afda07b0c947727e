"""
Seed hash index over every overlapping window of the reference

Every window of ``seed_size`` bases (sliding one base at a time) that contains
only A/C/G/T is indexed. Windows containing N are skipped.

STORAGE LAYOUT:
Each window is packed into a uint64 key (2 bits per base, first base in the
most significant position; seeds are therefore capped at 32 bases). Keys are
sorted together with their window positions, which gives a compact,
deterministic table that answers "all positions of this seed" with two binary
searches.

BOTH STRANDS FROM ONE TABLE:
Only forward windows are stored. A lookup for seed q returns
- (p, FORWARD) for every window p equal to q, and
- (p, REVERSE) for every window p equal to reverse_complement(q),
which is exactly what a table populated with both the forward and reverse
complement versions of every window would return, at half the memory.

The caller enforces the per-seed hit cap (h_max); the index always returns
full lists plus counts.

ON-DISK FORMAT (little-endian, version 1):
    magic              8 bytes   b"SNAPIDX1"
    format_version     uint32
    seed_size          uint32
    genome_checksum    32 bytes  SHA-256 of the packed genome
    contig_count       uint32
    contig table       contig_count x (name_len uint32, name utf-8, length uint64)
    genome_length      uint64
    genome payload     genome_length bytes (A/C/G/T/N ASCII)
    entry_count        uint64
    keys               entry_count x uint64 (sorted ascending)
    positions          entry_count x uint32 (ascending within equal keys)

Files are bit-reproducible for a given genome and seed size.
"""

import enum
import logging
import struct
from dataclasses import dataclass
from typing import BinaryIO, List, Optional, Tuple

import numpy as np

from src.genome.reference import (
    BASE_CODES,
    Contig,
    PackedGenome,
    reverse_complement_bytes,
)

logger = logging.getLogger(__name__)

MAGIC = b"SNAPIDX1"
FORMAT_VERSION = 1
MAX_SEED_SIZE = 32
DEFAULT_SEED_SIZE = 20

_HEADER = struct.Struct("<8sII32s")
_U32 = struct.Struct("<I")
_U64 = struct.Struct("<Q")


class Direction(str, enum.Enum):
    """Strand on which a seed (or a whole read) matches the reference"""

    FORWARD = "F"
    REVERSE = "R"

    def flipped(self) -> "Direction":
        return Direction.REVERSE if self is Direction.FORWARD else Direction.FORWARD


class IndexFormatError(ValueError):
    """Raised when an index file cannot be loaded"""

    pass


class IndexVersionError(IndexFormatError):
    """Raised when the file was written with a different format version"""

    pass


class IndexChecksumError(IndexFormatError):
    """Raised when the embedded genome does not match the expected checksum"""

    pass


class IndexTruncatedError(IndexFormatError):
    """Raised when the stream ends before the declared payload"""

    pass


SeedHit = Tuple[int, Direction]


_CODE_OF = tuple(int(code) for code in BASE_CODES)


def encode_seed(seed: bytes) -> Optional[int]:
    """Pack a seed into its 2-bit integer key, or None when it contains N"""
    key = 0
    for base in seed:
        code = _CODE_OF[base]
        if code > 3:
            return None
        key = (key << 2) | code
    return key


@dataclass(frozen=True)
class SeedIndex:
    """
    Sorted table of forward window keys over a PackedGenome

    Attributes:
        seed_size: Seed length s in bases
        keys: Sorted uint64 window keys
        positions: uint32 window starts, parallel to ``keys``
        genome: The reference the index was built over
        genome_checksum: SHA-256 of ``genome``
        format_version: On-disk format version
    """

    seed_size: int
    keys: np.ndarray
    positions: np.ndarray
    genome: PackedGenome
    genome_checksum: bytes
    format_version: int = FORMAT_VERSION

    @property
    def entry_count(self) -> int:
        return int(self.keys.size)

    def _forward_positions(self, key: int) -> np.ndarray:
        needle = np.uint64(key)
        lo = int(np.searchsorted(self.keys, needle, side="left"))
        hi = int(np.searchsorted(self.keys, needle, side="right"))
        return self.positions[lo:hi]

    def lookup_bytes(self, seed: bytes) -> Tuple[np.ndarray, np.ndarray]:
        """
        Forward and reverse-complement window positions for ``seed``

        Hot-path variant of ``lookup`` used by the aligner: returns the two
        position arrays without materializing tuples.
        """
        if len(seed) != self.seed_size:
            raise ValueError(f"Seed length {len(seed)} != index seed size {self.seed_size}")
        key = encode_seed(seed)
        if key is None:
            empty = self.positions[:0]
            return empty, empty
        rc_key = encode_seed(reverse_complement_bytes(seed))
        assert rc_key is not None
        return self._forward_positions(key), self._forward_positions(rc_key)

    def lookup(self, seed: str) -> Tuple[List[SeedHit], int]:
        """
        All stored positions for ``seed`` on both strands, plus the hit count

        Unknown seeds and seeds containing N return ``([], 0)``.
        """
        forward, reverse = self.lookup_bytes(seed.upper().encode("ascii"))
        hits: List[SeedHit] = [(int(p), Direction.FORWARD) for p in forward]
        hits.extend((int(p), Direction.REVERSE) for p in reverse)
        return hits, len(hits)


def window_keys(codes: np.ndarray, seed_size: int) -> Tuple[np.ndarray, np.ndarray]:
    """
    Packed keys of every N-free window

    Returns:
        (keys, positions) for windows ``[p, p + seed_size)`` with no N, in
        position order
    """
    window_count = codes.size - seed_size + 1
    is_n = (codes > 3).astype(np.int64)
    n_prefix = np.concatenate(([0], np.cumsum(is_n)))
    clean = (n_prefix[seed_size:] - n_prefix[:window_count]) == 0

    bits = (codes & 3).astype(np.uint64)
    keys = np.zeros(window_count, dtype=np.uint64)
    for i in range(seed_size):
        keys = (keys << np.uint64(2)) | bits[i : i + window_count]

    positions = np.flatnonzero(clean).astype(np.uint32)
    return keys[clean], positions


def build_index(genome: PackedGenome, seed_size: int = DEFAULT_SEED_SIZE) -> SeedIndex:
    """
    Index every overlapping ``seed_size`` window of ``genome``

    Raises:
        ValueError: seed size outside [1, 32] or genome shorter than the seed
    """
    if not 1 <= seed_size <= MAX_SEED_SIZE:
        raise ValueError(f"Seed size must be in [1, {MAX_SEED_SIZE}], got {seed_size}")
    if genome.total_length < seed_size:
        raise ValueError(
            f"Genome of length {genome.total_length} is shorter than seed size {seed_size}"
        )
    if genome.total_length > np.iinfo(np.uint32).max:
        raise ValueError("Genomes longer than 2^32 - 1 bases are not supported")

    keys, positions = window_keys(genome.codes(), seed_size)
    order = np.argsort(keys, kind="stable")

    index = SeedIndex(
        seed_size=seed_size,
        keys=keys[order],
        positions=positions[order],
        genome=genome,
        genome_checksum=genome.checksum(),
    )
    logger.info(
        f"Built seed index: {index.entry_count} windows",
        extra={"seed_size": seed_size, "records": index.entry_count},
    )
    return index


def save_index(index: SeedIndex, sink: BinaryIO) -> None:
    """Write ``index`` (including its genome) in the versioned binary format"""
    genome = index.genome
    sink.write(_HEADER.pack(MAGIC, index.format_version, index.seed_size, index.genome_checksum))
    sink.write(_U32.pack(len(genome.contigs)))
    for contig in genome.contigs:
        name = contig.name.encode("utf-8")
        sink.write(_U32.pack(len(name)))
        sink.write(name)
        sink.write(_U64.pack(contig.length))
    sink.write(_U64.pack(genome.total_length))
    sink.write(genome.sequence)
    sink.write(_U64.pack(index.entry_count))
    sink.write(index.keys.astype("<u8").tobytes())
    sink.write(index.positions.astype("<u4").tobytes())


def _read_exact(source: BinaryIO, size: int, what: str) -> bytes:
    data = source.read(size)
    if data is None or len(data) != size:
        raise IndexTruncatedError(f"Index stream truncated while reading {what}")
    return data


def load_index(source: BinaryIO, expected_genome: Optional[PackedGenome] = None) -> SeedIndex:
    """
    Read an index written by ``save_index``

    Args:
        source: Binary stream positioned at the magic bytes
        expected_genome: When given, the embedded genome checksum must match it

    Raises:
        IndexFormatError: bad magic bytes
        IndexVersionError: unsupported format version
        IndexTruncatedError: stream shorter than the declared payload
        IndexChecksumError: embedded genome corrupt or different from expected_genome
    """
    magic, version, seed_size, checksum = _HEADER.unpack(
        _read_exact(source, _HEADER.size, "header")
    )
    if magic != MAGIC:
        raise IndexFormatError(f"Not an index file (magic bytes {magic!r})")
    if version != FORMAT_VERSION:
        raise IndexVersionError(
            f"Index format version {version} is not supported (expected {FORMAT_VERSION})"
        )

    (contig_count,) = _U32.unpack(_read_exact(source, _U32.size, "contig count"))
    names: List[str] = []
    lengths: List[int] = []
    for _ in range(contig_count):
        (name_length,) = _U32.unpack(_read_exact(source, _U32.size, "contig name length"))
        names.append(_read_exact(source, name_length, "contig name").decode("utf-8"))
        (length,) = _U64.unpack(_read_exact(source, _U64.size, "contig length"))
        lengths.append(length)

    (genome_length,) = _U64.unpack(_read_exact(source, _U64.size, "genome length"))
    sequence = _read_exact(source, genome_length, "genome payload")

    contigs = []
    offset = 0
    for name, length in zip(names, lengths):
        contigs.append(Contig(name=name, start=offset, length=length))
        offset += length
    try:
        genome = PackedGenome(sequence=sequence, contigs=tuple(contigs))
    except ValueError as e:
        raise IndexFormatError(f"Corrupt contig table: {e}") from e

    if genome.checksum() != checksum:
        raise IndexChecksumError("Embedded genome does not match the stored checksum")
    if expected_genome is not None and expected_genome.checksum() != checksum:
        raise IndexChecksumError("Index was built over a different genome")

    (entry_count,) = _U64.unpack(_read_exact(source, _U64.size, "entry count"))
    keys = np.frombuffer(_read_exact(source, entry_count * 8, "keys"), dtype="<u8")
    positions = np.frombuffer(_read_exact(source, entry_count * 4, "positions"), dtype="<u4")

    return SeedIndex(
        seed_size=seed_size,
        keys=keys.astype(np.uint64),
        positions=positions.astype(np.uint32),
        genome=genome,
        genome_checksum=checksum,
        format_version=version,
    )
