"""Tests for the seed index: lookups on both strands and the on-disk format."""

import io
import itertools
import struct

import numpy as np
import pytest

from src.genome.reference import Contig, PackedGenome, reverse_complement
from src.index.seed_index import (
    Direction,
    IndexChecksumError,
    IndexFormatError,
    IndexTruncatedError,
    IndexVersionError,
    build_index,
    encode_seed,
    load_index,
    save_index,
)
from src.simulation.simulator import random_genome


def _genome(sequence: str, name: str = "c1") -> PackedGenome:
    contigs = (Contig(name, 0, len(sequence)),)
    return PackedGenome(sequence=sequence.encode("ascii"), contigs=contigs)


def _roundtrip(index):
    buffer = io.BytesIO()
    save_index(index, buffer)
    buffer.seek(0)
    return load_index(buffer)


class TestEncodeSeed:
    def test_two_bits_per_base(self):
        assert encode_seed(b"A") == 0
        assert encode_seed(b"T") == 3
        assert encode_seed(b"CA") == 0b0100

    def test_n_has_no_key(self):
        assert encode_seed(b"ACNT") is None


class TestLookup:
    def test_forward_and_reverse_hits(self):
        # AACG occurs at 0; its reverse complement CGTT occurs at 6
        index = build_index(_genome("AACGTACGTTA"), 4)

        hits, count = index.lookup("AACG")

        assert count == 2
        assert (0, Direction.FORWARD) in hits
        assert (6, Direction.REVERSE) in hits

    def test_ten_base_genome(self):
        index = build_index(_genome("ACGTACGTAC"), 4)

        hits, _ = index.lookup("ACGT")

        forward = sorted(pos for pos, direction in hits if direction is Direction.FORWARD)
        assert forward == [0, 4]
        assert index.entry_count == 7

    def test_reverse_complement_of_window(self):
        index = build_index(_genome("AACCGG"), 4)

        hits, count = index.lookup("GGTT")

        assert hits == [(0, Direction.REVERSE)]
        assert count == 1

    def test_all_windows_with_n(self):
        index = build_index(_genome("ACNTA"), 3)

        assert index.entry_count == 0
        assert index.lookup("ACG") == ([], 0)

    def test_palindrome_hits_both_strands_at_same_position(self):
        index = build_index(_genome("TTACGTTT"), 4)

        hits, count = index.lookup("ACGT")

        assert sorted(hits) == [(2, Direction.FORWARD), (2, Direction.REVERSE)]
        assert count == 2

    def test_windows_with_n_are_not_indexed(self):
        index = build_index(_genome("ACGTNACGT"), 4)

        assert index.entry_count == 2
        hits, _ = index.lookup("GTNA")
        assert hits == []

    def test_absent_seed(self):
        index = build_index(_genome("AAAAAAAA"), 4)

        assert index.lookup("CCCC") == ([], 0)

    def test_every_window_found_on_random_genome(self):
        genome = random_genome(2_000, rng_seed=3)
        index = build_index(genome, 12)
        sequence = genome.sequence.decode("ascii")

        for pos in range(0, genome.total_length - 12 + 1, 37):
            seed = sequence[pos : pos + 12]
            hits, _ = index.lookup(seed)
            assert (pos, Direction.FORWARD) in hits
            reverse_hits, _ = index.lookup(reverse_complement(seed))
            assert (pos, Direction.REVERSE) in reverse_hits

    def test_wrong_seed_length(self):
        index = build_index(_genome("ACGTACGT"), 4)

        with pytest.raises(ValueError):
            index.lookup("ACG")

    @pytest.mark.parametrize("seed_size", [0, 33])
    def test_seed_size_bounds(self, seed_size):
        with pytest.raises(ValueError):
            build_index(_genome("ACGT" * 20), seed_size)

    def test_genome_shorter_than_seed(self):
        with pytest.raises(ValueError):
            build_index(_genome("ACGT"), 8)


class TestSaveLoad:
    def test_every_seed_answers_identically_after_reload(self):
        genome = random_genome(3_000, rng_seed=11, contig_count=3)
        index = build_index(genome, 4)
        loaded = _roundtrip(index)

        for letters in itertools.product("ACGT", repeat=4):
            seed = "".join(letters)
            assert sorted(loaded.lookup(seed)[0]) == sorted(index.lookup(seed)[0])
        assert loaded.genome == genome
        assert loaded.seed_size == 4

    def test_bit_reproducible(self):
        genome = random_genome(1_000, rng_seed=2)
        first, second = io.BytesIO(), io.BytesIO()

        save_index(build_index(genome, 8), first)
        save_index(build_index(genome, 8), second)

        assert first.getvalue() == second.getvalue()

    def test_keys_sorted(self):
        index = build_index(random_genome(1_000, rng_seed=4), 6)

        assert np.all(np.diff(index.keys.astype(np.int64)) >= 0)

    def test_bad_magic(self):
        with pytest.raises(IndexFormatError, match="magic"):
            load_index(io.BytesIO(b"NOTANIDX" + b"\0" * 64))

    def test_unsupported_version(self):
        buffer = io.BytesIO()
        save_index(build_index(_genome("ACGTACGTAA"), 4), buffer)
        data = bytearray(buffer.getvalue())
        data[8:12] = struct.pack("<I", 99)

        with pytest.raises(IndexVersionError):
            load_index(io.BytesIO(bytes(data)))

    def test_truncated(self):
        buffer = io.BytesIO()
        save_index(build_index(_genome("ACGTACGTAA"), 4), buffer)

        with pytest.raises(IndexTruncatedError):
            load_index(io.BytesIO(buffer.getvalue()[:-3]))

    def test_corrupt_genome_payload(self):
        buffer = io.BytesIO()
        save_index(build_index(_genome("ACGTACGTAA"), 4), buffer)
        data = buffer.getvalue()
        payload = data.index(b"ACGTACGTAA")
        corrupt = data[:payload] + b"T" + data[payload + 1 :]

        with pytest.raises(IndexChecksumError):
            load_index(io.BytesIO(corrupt))

    def test_different_expected_genome(self):
        buffer = io.BytesIO()
        save_index(build_index(_genome("ACGTACGTAA"), 4), buffer)
        buffer.seek(0)

        with pytest.raises(IndexChecksumError, match="different genome"):
            load_index(buffer, expected_genome=_genome("ACGTACGTAC"))
