"""
Simulated reads with known origin

Each read is cut from a uniformly chosen locus and strand of the reference,
then passes through two error layers:

1. Germline-style mutations of the sampled haplotype: SNPs (a different base)
   at ``snp_rate`` and indels at ``indel_mutation_rate`` (length 1-3, half
   insertions of random bases, half deletions).
2. Sequencing errors at ``seq_error_rate``; an ``indel_error_fraction`` share
   of them are single-base indels, the rest substitutions.

The forward extract is mutated first and reverse-strand reads are the reverse
complement of the mutated extract. Loci whose extract contains N are
resampled. One ``numpy.random.Generator`` seeded with ``rng_seed`` drives a
stream, so a seed always reproduces the same reads.

TRUTH IN READ NAMES:
``<contig>_<1-based start>_<F|R>_<serial>``, parsed right to left so contig
names may contain underscores.
"""

import logging
from dataclasses import dataclass
from typing import BinaryIO, Iterator, List, Optional, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from src.formats.fastq import Read, write_fastq
from src.genome.reference import Contig, PackedGenome, reverse_complement
from src.index.seed_index import Direction

logger = logging.getLogger(__name__)

_ALPHABET = np.frombuffer(b"ACGT", dtype=np.uint8)
_MAX_LOCUS_ATTEMPTS = 1000


class SimProfile(BaseModel):
    """Read length, mutation and sequencing error model for one simulated run"""

    model_config = ConfigDict(frozen=True)

    read_length: int = Field(default=100, ge=1)
    snp_rate: float = Field(default=0.0009, ge=0.0, le=1.0)
    indel_mutation_rate: float = Field(default=0.0001, ge=0.0, le=1.0)
    seq_error_rate: float = Field(default=0.02, ge=0.0, le=1.0)
    indel_error_fraction: float = Field(default=0.0, ge=0.0, le=1.0)
    max_indel_length: int = Field(default=3, ge=1)
    quality_char: str = Field(default="I", min_length=1, max_length=1)
    rng_seed: int = Field(default=0, ge=0)


def short_read_profile(error_rate: float, read_length: int = 100, rng_seed: int = 0) -> SimProfile:
    """Human-like mutation rates with substitution-only sequencing errors"""
    return SimProfile(read_length=read_length, seq_error_rate=error_rate, rng_seed=rng_seed)


def long_read_profile(
    error_rate: float = 0.05, read_length: int = 1000, rng_seed: int = 0
) -> SimProfile:
    """Long reads where a fifth of the sequencing errors are indels"""
    return SimProfile(
        read_length=read_length,
        seq_error_rate=error_rate,
        indel_error_fraction=0.2,
        rng_seed=rng_seed,
    )


@dataclass(frozen=True)
class Truth:
    """Origin of a simulated read: contig, 0-based forward-strand start, strand"""

    contig: str
    position: int
    direction: Direction


@dataclass(frozen=True)
class EventCounts:
    """Events that landed inside the emitted read"""

    snps: int = 0
    indels: int = 0
    seq_substitutions: int = 0
    seq_indels: int = 0

    @property
    def total(self) -> int:
        return self.snps + self.indels + self.seq_substitutions + self.seq_indels


@dataclass(frozen=True)
class SimulatedRead:
    read: Read
    truth: Truth
    events: EventCounts


def encode_truth(contig: str, position: int, direction: Direction, serial: int) -> str:
    return f"{contig}_{position + 1}_{direction.value}_{serial}"


def decode_truth(name: str) -> Optional[Truth]:
    """Truth encoded by ``encode_truth``, or None for any other name"""
    parts = name.rsplit("_", 3)
    if len(parts) != 4:
        return None
    contig, position, direction, serial = parts
    if not contig or not position.isdigit() or not serial.isdigit() or int(position) < 1:
        return None
    if direction not in ("F", "R"):
        return None
    return Truth(contig=contig, position=int(position) - 1, direction=Direction(direction))


class _Mutator:
    def __init__(self, rng: np.random.Generator, profile: SimProfile):
        self.rng = rng
        self.profile = profile

    def random_bases(self, count: int) -> bytes:
        return _ALPHABET[self.rng.integers(0, 4, size=count)].tobytes()

    def substitute(self, sequence: bytearray, rate: float, limit: int) -> int:
        """Replace bases at ``rate`` with a different base; returns hits before ``limit``"""
        if rate <= 0 or not sequence:
            return 0
        positions = np.flatnonzero(self.rng.random(len(sequence)) < rate)
        if positions.size == 0:
            return 0
        shifts = self.rng.integers(1, 4, size=positions.size)
        for pos, shift in zip(positions.tolist(), shifts.tolist()):
            current = b"ACGT".find(bytes([sequence[pos]]))
            sequence[pos] = int(_ALPHABET[(current + shift) % 4])
        return int(np.count_nonzero(positions < limit))

    def indels(self, sequence: bytearray, rate: float, max_length: int, limit: int) -> int:
        """Insert or delete runs at ``rate``; right to left so earlier positions stay valid"""
        if rate <= 0 or not sequence:
            return 0
        positions = np.flatnonzero(self.rng.random(len(sequence)) < rate)
        landed = 0
        for pos in positions[::-1].tolist():
            length = int(self.rng.integers(1, max_length + 1))
            if self.rng.random() < 0.5:
                sequence[pos:pos] = self.random_bases(length)
            else:
                del sequence[pos : pos + length]
            if pos < limit:
                landed += 1
        return landed

    def sequencing_errors(self, sequence: bytearray, limit: int) -> Tuple[int, int]:
        profile = self.profile
        if profile.seq_error_rate <= 0 or not sequence:
            return 0, 0
        positions = np.flatnonzero(self.rng.random(len(sequence)) < profile.seq_error_rate)
        substitutions = indels = 0
        for pos in positions[::-1].tolist():
            if self.rng.random() < profile.indel_error_fraction:
                if self.rng.random() < 0.5:
                    sequence[pos:pos] = self.random_bases(1)
                else:
                    del sequence[pos]
                indels += pos < limit
            else:
                current = b"ACGT".find(bytes([sequence[pos]]))
                sequence[pos] = int(_ALPHABET[(current + int(self.rng.integers(1, 4))) % 4])
                substitutions += pos < limit
        return substitutions, indels


def _usable_contigs(genome: PackedGenome, read_length: int) -> Tuple[List[int], np.ndarray]:
    indices = [i for i, c in enumerate(genome.contigs) if c.length >= read_length]
    weights = np.array(
        [genome.contigs[i].length - read_length + 1 for i in indices], dtype=np.float64
    )
    return indices, weights / weights.sum() if indices else weights


def simulate(genome: PackedGenome, profile: SimProfile, count: int) -> Iterator[SimulatedRead]:
    """
    Stream ``count`` simulated reads

    Raises:
        ValueError: count <= 0, no contig long enough for the read length, or
            no N-free locus found
    """
    if count <= 0:
        raise ValueError(f"Read count must be positive, got {count}")
    read_length = profile.read_length
    indices, weights = _usable_contigs(genome, read_length)
    if not indices:
        raise ValueError(f"No contig is at least {read_length} bases long")

    rng = np.random.default_rng(profile.rng_seed)
    mutator = _Mutator(rng, profile)
    # extra bases so deletions still leave a full-length read
    padding = read_length // 4 + 2 * profile.max_indel_length + 8
    quality = profile.quality_char * read_length

    serial = 0
    attempts = 0
    while serial < count:
        contig = genome.contigs[indices[int(rng.choice(len(indices), p=weights))]]
        offset = int(rng.integers(0, contig.length - read_length + 1))
        direction = Direction.FORWARD if rng.random() < 0.5 else Direction.REVERSE
        span = min(read_length + padding, contig.length - offset)
        extract = bytearray(genome.window(contig.start + offset, span))

        if b"N" in extract[:read_length]:
            attempts += 1
            if attempts >= _MAX_LOCUS_ATTEMPTS:
                raise ValueError("Could not find an N-free locus for the read length")
            continue
        attempts = 0
        # N past the read would only surface after deletions
        extract = extract.split(b"N", 1)[0]

        snps = mutator.substitute(extract, profile.snp_rate, read_length)
        indels = mutator.indels(
            extract, profile.indel_mutation_rate, profile.max_indel_length, read_length
        )
        substitutions, seq_indels = mutator.sequencing_errors(extract, read_length)
        if len(extract) < read_length:
            extract.extend(mutator.random_bases(read_length - len(extract)))

        bases = extract[:read_length].decode("ascii")
        if direction is Direction.REVERSE:
            bases = reverse_complement(bases)

        yield SimulatedRead(
            read=Read(
                name=encode_truth(contig.name, offset, direction, serial),
                bases=bases,
                qualities=quality,
            ),
            truth=Truth(contig=contig.name, position=offset, direction=direction),
            events=EventCounts(snps, indels, substitutions, seq_indels),
        )
        serial += 1


def write_simulated_fastq(
    genome: PackedGenome, profile: SimProfile, count: int, sink: BinaryIO
) -> int:
    """Simulate ``count`` reads straight into a FASTQ stream"""
    written = write_fastq((sim.read for sim in simulate(genome, profile, count)), sink)
    logger.info(
        f"Simulated {written} reads of {profile.read_length} bases",
        extra={"reads": written},
    )
    return written


def random_genome(
    length: int, rng_seed: int = 0, contig_count: int = 1, name_prefix: str = "chr"
) -> PackedGenome:
    """Uniform random A/C/G/T reference split into ``contig_count`` near-equal contigs"""
    if length < contig_count or contig_count < 1:
        raise ValueError(f"Cannot split {length} bases into {contig_count} contigs")
    rng = np.random.default_rng(rng_seed)
    sequence = _ALPHABET[rng.integers(0, 4, size=length)].tobytes()
    bounds = np.linspace(0, length, contig_count + 1).astype(int).tolist()
    contigs = tuple(
        Contig(name=f"{name_prefix}{i + 1}", start=start, length=end - start)
        for i, (start, end) in enumerate(zip(bounds[:-1], bounds[1:]))
    )
    return PackedGenome(sequence=sequence, contigs=contigs)
