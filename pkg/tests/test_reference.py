"""Tests for FASTA loading and the packed genome."""

import gzip
import io
import logging

import numpy as np
import pytest

from src.genome.reference import (
    Contig,
    FastaFormatError,
    GenomeRangeError,
    InvalidBaseError,
    PackedGenome,
    load_fasta,
    reverse_complement,
    reverse_complement_bytes,
)


def _load(text: str) -> PackedGenome:
    return load_fasta(io.BytesIO(text.encode("ascii")))


class TestLoadFasta:
    def test_two_contigs_concatenated_in_file_order(self):
        genome = _load(">c1 first contig\nACGT\nAC\n>c2\nGGGG\n")

        assert genome.sequence == b"ACGTACGGGG"
        assert [c.name for c in genome.contigs] == ["c1", "c2"]
        assert genome.contigs[1].start == 6
        assert genome.total_length == 10

    def test_lowercase_and_iupac_normalized(self):
        genome = _load(">c1\nacgtRYKMswbdhvnU\n")

        assert genome.sequence == b"ACGT" + b"N" * 12

    def test_whitespace_and_blank_lines_ignored(self):
        genome = _load("\n>c1\nAC GT\n\nTT\t\n")

        assert genome.sequence == b"ACGTTT"

    def test_illegal_character_reports_line(self):
        with pytest.raises(FastaFormatError, match="line 3") as error:
            _load(">c1\nACGT\nAC1T\n")

        assert error.value.line_number == 3

    def test_sequence_before_header(self):
        with pytest.raises(FastaFormatError, match="line 1"):
            _load("ACGT\n>c1\nACGT\n")

    def test_empty_input(self):
        with pytest.raises(FastaFormatError):
            _load("")

    def test_empty_contig_skipped(self, caplog):
        with caplog.at_level(logging.WARNING, logger="src.genome.reference"):
            genome = _load(">empty\n>c2\nACGT\n")

        assert [c.name for c in genome.contigs] == ["c2"]
        assert genome.contigs[0].start == 0
        (warning,) = [r for r in caplog.records if r.levelno == logging.WARNING]
        assert warning.contig == "empty"
        assert not hasattr(warning, "path")

    def test_gzip_input(self):
        payload = gzip.compress(b">c1\nACGTN\n")

        genome = load_fasta(io.BytesIO(payload))

        assert genome.sequence == b"ACGTN"


class TestPackedGenome:
    @pytest.fixture
    def genome(self):
        return _load(">c1\nAAAAACCCCC\n>c2\nGGGGGTTTTT\n")

    def test_to_contig_coordinate(self, genome):
        assert genome.to_contig_coordinate(0).contig_name == "c1"
        coordinate = genome.to_contig_coordinate(12)
        assert coordinate.contig_name == "c2"
        assert coordinate.offset_in_contig == 2

    def test_to_global_inverts_to_contig_coordinate(self, genome):
        for pos in range(genome.total_length):
            coordinate = genome.to_contig_coordinate(pos)
            assert genome.to_global(coordinate.contig_name, coordinate.offset_in_contig) == pos

    def test_position_out_of_range(self, genome):
        with pytest.raises(GenomeRangeError):
            genome.to_contig_coordinate(20)
        with pytest.raises(GenomeRangeError):
            genome.substring(-1, 5)

    def test_substring_truncated_at_end(self, genome):
        assert genome.substring(17, 10) == "TTT"

    def test_window_clips_and_never_raises(self, genome):
        assert genome.window(-3, 4) == b"AAAA"
        assert genome.window(25, 4) == b""

    def test_codes(self, genome):
        codes = _load(">c\nACGTN\n").codes()

        assert codes.tolist() == [0, 1, 2, 3, 4]
        assert codes.dtype == np.uint8

    def test_contig_table_must_tile(self):
        with pytest.raises(ValueError):
            PackedGenome(sequence=b"ACGT", contigs=(Contig("c1", 0, 3),))

    def test_checksum_depends_on_names(self):
        a = PackedGenome(sequence=b"ACGT", contigs=(Contig("c1", 0, 4),))
        b = PackedGenome(sequence=b"ACGT", contigs=(Contig("c2", 0, 4),))

        assert a.checksum() != b.checksum()


class TestReverseComplement:
    def test_basic(self):
        assert reverse_complement("AACGTN") == "NACGTT"

    def test_involution(self):
        sequence = "ACGTTGCANNAC"
        assert reverse_complement(reverse_complement(sequence)) == sequence

    def test_invalid_base(self):
        with pytest.raises(InvalidBaseError):
            reverse_complement("ACXT")

    def test_bytes_variant(self):
        assert reverse_complement_bytes(b"AACGTN") == b"NACGTT"
