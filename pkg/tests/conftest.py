"""Shared fixtures: a small random reference, its index, and FASTA/FASTQ files on disk."""

import pytest

from src.genome.reference import PackedGenome
from src.index.seed_index import SeedIndex, build_index, save_index
from src.simulation.simulator import random_genome

GENOME_LENGTH = 50_000


@pytest.fixture(scope="session")
def genome() -> PackedGenome:
    """50 kb uniform random reference in two contigs"""
    return random_genome(GENOME_LENGTH, rng_seed=7, contig_count=2)


@pytest.fixture(scope="session")
def index(genome) -> SeedIndex:
    return build_index(genome, 20)


def write_fasta(path, contigs, width=60):
    """Write ``[(name, sequence), ...]`` as a FASTA file wrapped at ``width``"""
    with open(path, "w", encoding="ascii") as sink:
        for name, sequence in contigs:
            sink.write(f">{name}\n")
            for start in range(0, len(sequence), width):
                sink.write(sequence[start : start + width] + "\n")
    return str(path)


@pytest.fixture
def genome_fasta(tmp_path, genome) -> str:
    contigs = []
    for contig in genome.contigs:
        sequence = genome.sequence[contig.start : contig.end].decode("ascii")
        contigs.append((contig.name, sequence))
    return write_fasta(tmp_path / "reference.fa", contigs)


@pytest.fixture
def index_file(tmp_path, index) -> str:
    path = tmp_path / "reference.snapidx"
    with open(path, "wb") as sink:
        save_index(index, sink)
    return str(path)
