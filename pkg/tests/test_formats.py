"""Tests for FASTQ parsing/splitting and SAM record output."""

import gzip
import io

import pytest

from src.alignment.aligner import AlignerParams, MultipleHits, NotFound, ResultKind, SingleHit
from src.formats.fastq import (
    FastqFormatError,
    Read,
    find_record_start,
    iter_fastq_range,
    read_fastq,
    write_fastq,
)
from src.formats.sam import (
    FLAG_REVERSE,
    FLAG_UNMAPPED,
    SamFormatError,
    SamRecord,
    mapping_quality,
    parse_sam_line,
    result_kind_of,
    sam_header,
    write_sam,
    write_sam_stream,
)
from src.genome.reference import Contig, PackedGenome
from src.index.seed_index import Direction


def _reads():
    return [
        Read("r1", "ACGTACGT", "IIIIIIII"),
        # qualities starting with '@' look like a header line
        Read("r2", "GGGTTT", "@@@III", description="sample=2"),
        Read("r3", "NNACG", "+++++"),
        Read("r4", "A", "@"),
        Read("r5", "TTTTTTTTTTTT", "@IIIIIIIIIII"),
    ]


class TestRead:
    def test_quality_length_mismatch(self):
        with pytest.raises(ValueError):
            Read("r1", "ACGT", "III")

    def test_empty_name(self):
        with pytest.raises(ValueError):
            Read("", "A", "I")

    def test_to_fastq(self):
        read = Read("r1", "ACGT", "IIII", description="x y")

        assert read.to_fastq() == b"@r1 x y\nACGT\n+\nIIII\n"


class TestReadFastq:
    def test_serialize_then_parse(self):
        buffer = io.BytesIO()
        write_fastq(_reads(), buffer)
        buffer.seek(0)

        assert list(read_fastq(buffer)) == _reads()

    def test_gzip_and_crlf(self):
        payload = gzip.compress(b"@r1 desc\r\nacgtn\r\n+r1\r\nIIIII\r\n")

        (read,) = read_fastq(io.BytesIO(payload))

        assert read == Read("r1", "ACGTN", "IIIII", description="desc")

    def test_other_letters_become_n(self):
        (read,) = read_fastq(io.BytesIO(b"@r1\nACRYK.\n+\nIIIIII\n"))

        assert read.bases == "ACNNNN"

    def test_blank_lines_between_records(self):
        data = b"@r1\nAC\n+\nII\n\n\n@r2\nGT\n+\nII\n"

        assert [read.name for read in read_fastq(io.BytesIO(data))] == ["r1", "r2"]

    def test_quality_length_mismatch_reports_offset(self):
        data = b"@r1\nAC\n+\nII\n@r2\nACGT\n+\nIII\n"

        with pytest.raises(FastqFormatError, match="byte 12") as error:
            list(read_fastq(io.BytesIO(data)))

        assert error.value.offset == 12

    def test_missing_separator(self):
        with pytest.raises(FastqFormatError, match="'\\+'"):
            list(read_fastq(io.BytesIO(b"@r1\nAC\n-\nII\n")))

    def test_truncated_record(self):
        with pytest.raises(FastqFormatError, match="truncated"):
            list(read_fastq(io.BytesIO(b"@r1\nAC\n+\n")))

    def test_illegal_base(self):
        with pytest.raises(FastqFormatError, match="illegal"):
            list(read_fastq(io.BytesIO(b"@r1\nA1\n+\nII\n")))

    def test_empty_input(self):
        assert list(read_fastq(io.BytesIO(b""))) == []


class TestByteRanges:
    @pytest.fixture
    def fastq_path(self, tmp_path):
        path = tmp_path / "reads.fq"
        with open(path, "wb") as sink:
            write_fastq(_reads() * 3, sink)
        return str(path)

    def test_every_split_point_partitions_records(self, fastq_path):
        with open(fastq_path, "rb") as handle:
            size = len(handle.read())
        expected = _reads() * 3

        for split in range(size + 1):
            head = [read for _, read in iter_fastq_range(fastq_path, 0, split)]
            tail = [read for _, read in iter_fastq_range(fastq_path, split, size)]
            assert head + tail == expected, split

    def test_record_start_skips_quality_lines_starting_with_at(self, fastq_path):
        with open(fastq_path, "rb") as handle:
            data = handle.read()
            # start of r2's quality line "@@@III"
            offset = data.index(b"@@@III")

            start = find_record_start(handle, offset)

        assert data[start:].startswith(b"@r3")

    def test_offsets_reported(self, fastq_path):
        offsets = [offset for offset, _ in iter_fastq_range(fastq_path, 0, 10**9)]

        assert offsets[0] == 0
        assert offsets[1] == len(_reads()[0].to_fastq())


@pytest.fixture
def small_genome():
    sequence = b"ACGTACGTAC" + b"GGGGCCCCAATT"
    return PackedGenome(sequence=sequence, contigs=(Contig("c1", 0, 10), Contig("c2", 10, 12)))


class TestWriteSam:
    def test_single_hit_forward(self, small_genome):
        read = Read("r1", "ACGTACGA", "ABCDEFGH")

        record = write_sam(SingleHit(9, Direction.FORWARD, 1, 4), read, small_genome)

        assert (record.flag, record.rname, record.pos, record.cigar) == (0, "c1", 10, "8M")
        assert record.mapq == 40
        assert record.tag("NM") == "1"
        assert record.tag("XR") == "single"
        assert record.seq == "ACGTACGA"

    def test_position_in_second_contig(self, small_genome):
        read = Read("r1", "GGCC", "IIII")

        record = write_sam(SingleHit(12, Direction.FORWARD, 0, 6), read, small_genome)

        assert (record.rname, record.pos, record.mapq) == ("c2", 3, 60)

    def test_reverse_hit(self, small_genome):
        read = Read("r1", "AACG", "ABCD")

        record = write_sam(SingleHit(2, Direction.REVERSE, 0, 2), read, small_genome)

        assert record.flag == FLAG_REVERSE
        assert record.is_reverse
        assert record.seq == "CGTT"
        assert record.qual == "DCBA"

    def test_not_found(self, small_genome):
        read = Read("r1", "ACGT", "IIII")

        record = write_sam(NotFound(), read, small_genome)

        assert record.flag == FLAG_UNMAPPED
        assert (record.rname, record.pos, record.mapq, record.cigar) == ("*", 0, 0, "*")
        assert record.tag("XR") == "not_found"
        assert record.to_line().split("\t")[:6] == ["r1", "4", "*", "0", "0", "*"]

    def test_multiple_hits(self, small_genome):
        read = Read("r1", "ACGT", "IIII")

        placed = write_sam(MultipleHits(4, Direction.FORWARD, 0), read, small_genome)
        unplaced = write_sam(MultipleHits(), read, small_genome)

        assert (placed.flag, placed.pos, placed.mapq) == (0, 5, 0)
        assert unplaced.is_unmapped
        assert result_kind_of(placed) is ResultKind.MULTIPLE
        assert result_kind_of(unplaced) is ResultKind.MULTIPLE

    def test_mapping_quality(self):
        assert mapping_quality(SingleHit(0, Direction.FORWARD, 0, 6)) == 60
        assert mapping_quality(SingleHit(0, Direction.FORWARD, 0, 2)) == 20
        assert mapping_quality(SingleHit(0, Direction.FORWARD, 0, 9)) == 60
        assert mapping_quality(NotFound()) == 0


class TestSamText:
    def test_header(self, small_genome):
        lines = sam_header(small_genome, AlignerParams(), "0.1.0")

        assert lines[0] == "@HD\tVN:1.6\tSO:unsorted"
        assert lines[1:3] == ["@SQ\tSN:c1\tLN:10", "@SQ\tSN:c2\tLN:12"]
        assert lines[3].startswith("@PG\tID:snap-align")
        assert "seed_size=20" in lines[3]

    def test_parse_line_inverts_to_line(self, small_genome):
        read = Read("r1", "AACG", "ABCD")
        record = write_sam(SingleHit(2, Direction.REVERSE, 1, 3), read, small_genome)

        assert parse_sam_line(record.to_line() + "\n") == record

    def test_parse_rejects_header_and_short_lines(self):
        with pytest.raises(SamFormatError):
            parse_sam_line("@HD\tVN:1.6")
        with pytest.raises(SamFormatError):
            parse_sam_line("r1\t0\tc1")
        with pytest.raises(SamFormatError):
            parse_sam_line("r1\tx\tc1\t1\t0\t4M\t*\t0\t0\tACGT\tIIII")

    def test_kind_without_xr_tag(self):
        base = dict(qname="r", rname="c1", pos=1, cigar="4M", seq="ACGT", qual="IIII")

        assert result_kind_of(SamRecord(flag=0, mapq=30, **base)) is ResultKind.SINGLE
        assert result_kind_of(SamRecord(flag=0, mapq=0, **base)) is ResultKind.MULTIPLE
        assert result_kind_of(SamRecord(flag=4, mapq=0, **base)) is ResultKind.NOT_FOUND

    def test_write_stream(self, small_genome):
        sink = io.StringIO()
        records = [write_sam(NotFound(), Read(f"r{i}", "A", "I"), small_genome) for i in range(3)]

        count = write_sam_stream(sink, records, header=["@HD\tVN:1.6"])

        assert count == 3
        assert sink.getvalue().count("\n") == 4
