"""
Index job: FASTA reference -> seed index file

The index is written to a temporary file next to the destination and moved
into place once complete, so an interrupted run never leaves a truncated
index under the final name.
"""

import logging
import os
import tempfile
from typing import Optional

from src.genome.reference import PackedGenome, load_fasta
from src.index.seed_index import MAGIC, SeedIndex, build_index, load_index, save_index
from src.utils.logging_setup import log_execution_time

logger = logging.getLogger(__name__)


def load_reference(path: str) -> PackedGenome:
    """Reference genome from a FASTA file or from the genome embedded in an index"""
    with open(path, "rb") as handle:
        if handle.read(len(MAGIC)) == MAGIC:
            handle.seek(0)
            return load_index(handle).genome
    with open(path, "rb") as handle:
        return load_fasta(handle)


def load_index_file(path: str, expected_genome: Optional[PackedGenome] = None) -> SeedIndex:
    with log_execution_time(logger, "Index load", path=path):
        with open(path, "rb") as handle:
            return load_index(handle, expected_genome)


def run_index(fasta_path: str, seed_size: int, output_path: str) -> SeedIndex:
    """
    Build and save the seed index of ``fasta_path``

    Raises:
        OSError: unreadable input or unwritable output
        ValueError: malformed FASTA or invalid seed size
    """
    with open(fasta_path, "rb") as handle:
        genome = load_fasta(handle)

    with log_execution_time(logger, "Index build", seed_size=seed_size, path=fasta_path):
        index = build_index(genome, seed_size)

    directory = os.path.dirname(os.path.abspath(output_path))
    fd, tmp_path = tempfile.mkstemp(prefix=".snapidx-", dir=directory)
    try:
        with os.fdopen(fd, "wb") as sink:
            save_index(index, sink)
        os.replace(tmp_path, output_path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise

    logger.info(
        f"Wrote index with {index.entry_count} entries",
        extra={"path": output_path, "records": index.entry_count, "seed_size": seed_size},
    )
    return index
