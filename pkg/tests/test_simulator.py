"""Tests for the read simulator and truth-encoded read names."""

import io
import math

import pytest
from pydantic import ValidationError

from src.genome.reference import reverse_complement
from src.index.seed_index import Direction
from src.simulation.simulator import (
    SimProfile,
    Truth,
    decode_truth,
    encode_truth,
    long_read_profile,
    random_genome,
    short_read_profile,
    simulate,
    write_simulated_fastq,
)

_ERROR_FREE = dict(snp_rate=0.0, indel_mutation_rate=0.0, seq_error_rate=0.0)


class TestTruthNames:
    def test_encode(self):
        assert encode_truth("chr1", 0, Direction.FORWARD, 7) == "chr1_1_F_7"

    def test_decode_roundtrip_with_underscores_in_contig(self):
        name = encode_truth("chr_Un_gl000220", 41, Direction.REVERSE, 3)

        assert decode_truth(name) == Truth("chr_Un_gl000220", 41, Direction.REVERSE)

    @pytest.mark.parametrize(
        "name", ["myread", "chr1_0_F_1", "chr1_12_X_1", "chr1_abc_F_1", "_5_F_1", "chr1_5_F_x"]
    )
    def test_decode_rejects_other_names(self, name):
        assert decode_truth(name) is None


class TestSimulate:
    def test_error_free_reads_are_reference_substrings(self, genome):
        profile = SimProfile(rng_seed=1, **_ERROR_FREE)

        for sim in simulate(genome, profile, 200):
            origin = genome.to_global(sim.truth.contig, sim.truth.position)
            expected = genome.substring(origin, 100)
            if sim.truth.direction is Direction.REVERSE:
                expected = reverse_complement(expected)
            assert sim.read.bases == expected
            assert sim.events.total == 0

    def test_truth_matches_read_name(self, genome):
        for sim in simulate(genome, SimProfile(rng_seed=2), 50):
            assert decode_truth(sim.read.name) == sim.truth

    def test_reads_have_profile_length_and_quality(self, genome):
        profile = SimProfile(read_length=150, quality_char="5", indel_mutation_rate=0.01)

        for sim in simulate(genome, profile, 50):
            assert len(sim.read) == 150
            assert sim.read.qualities == "5" * 150

    def test_both_strands_sampled(self, genome):
        profile = SimProfile(rng_seed=9, **_ERROR_FREE)
        sims = list(simulate(genome, profile, 100))

        assert {sim.truth.direction for sim in sims} == {Direction.FORWARD, Direction.REVERSE}

    def test_deterministic(self, genome):
        profile = short_read_profile(0.05, rng_seed=42)

        first = [sim.read for sim in simulate(genome, profile, 100)]
        second = [sim.read for sim in simulate(genome, profile, 100)]

        assert first == second

    def test_different_seeds_differ(self, genome):
        a = [sim.read for sim in simulate(genome, short_read_profile(0.02, rng_seed=1), 20)]
        b = [sim.read for sim in simulate(genome, short_read_profile(0.02, rng_seed=2), 20)]

        assert a != b

    def test_snp_count_within_three_sigma(self, genome):
        rate = 0.01
        profile = SimProfile(snp_rate=rate, indel_mutation_rate=0.0, seq_error_rate=0.0)
        reads = 1_000

        observed = sum(sim.events.snps for sim in simulate(genome, profile, reads))

        bases = reads * profile.read_length
        expected = bases * rate
        sigma = math.sqrt(bases * rate * (1 - rate))
        assert abs(observed - expected) <= 3 * sigma

    def test_substitution_errors_change_bases(self, genome):
        profile = SimProfile(snp_rate=0.0, indel_mutation_rate=0.0, seq_error_rate=0.05)

        for sim in simulate(genome, profile, 100):
            origin = genome.to_global(sim.truth.contig, sim.truth.position)
            reference = genome.substring(origin, 100)
            bases = sim.read.bases
            if sim.truth.direction is Direction.REVERSE:
                bases = reverse_complement(bases)
            mismatches = sum(a != b for a, b in zip(bases, reference))
            assert mismatches == sim.events.seq_substitutions

    def test_long_read_profile(self, genome):
        profile = long_read_profile(rng_seed=3)

        sims = list(simulate(genome, profile, 10))

        assert profile.indel_error_fraction == pytest.approx(0.2)
        assert all(len(sim.read) == 1000 for sim in sims)
        assert sum(sim.events.seq_indels for sim in sims) > 0

    @pytest.mark.parametrize("count", [0, -3])
    def test_non_positive_count(self, genome, count):
        with pytest.raises(ValueError):
            list(simulate(genome, SimProfile(), count))

    def test_read_longer_than_every_contig(self, genome):
        with pytest.raises(ValueError, match="contig"):
            list(simulate(genome, SimProfile(read_length=30_000), 1))

    def test_profile_validation(self):
        with pytest.raises(ValidationError):
            SimProfile(seq_error_rate=1.5)
        with pytest.raises(ValidationError):
            SimProfile(read_length=0)


class TestWriteFastq:
    def test_byte_identical_for_same_seed(self, genome):
        first, second = io.BytesIO(), io.BytesIO()
        profile = short_read_profile(0.02, rng_seed=5)

        assert write_simulated_fastq(genome, profile, 25, first) == 25
        write_simulated_fastq(genome, profile, 25, second)

        assert first.getvalue() == second.getvalue()
        assert first.getvalue().count(b"\n") == 100


class TestRandomGenome:
    def test_contigs_tile_genome(self):
        genome = random_genome(1_001, rng_seed=0, contig_count=3)

        assert [c.name for c in genome.contigs] == ["chr1", "chr2", "chr3"]
        assert sum(c.length for c in genome.contigs) == 1_001
        assert set(genome.sequence) <= set(b"ACGT")

    def test_invalid_split(self):
        with pytest.raises(ValueError):
            random_genome(2, contig_count=3)
