"""
Simulate job: reference -> FASTQ of simulated reads with truth-encoded names
"""

import logging
import sys

from src.jobs.index_job import load_reference
from src.simulation.simulator import SimProfile, write_simulated_fastq
from src.utils.logging_setup import log_execution_time

logger = logging.getLogger(__name__)


def run_simulate(reference_path: str, output_path: str, count: int, profile: SimProfile) -> int:
    """
    Write ``count`` simulated reads to ``output_path`` ("-" for stdout)

    The same profile (including ``rng_seed``) always produces the same bytes.
    """
    genome = load_reference(reference_path)
    with log_execution_time(logger, "Read simulation", reads=count, path=output_path):
        if output_path == "-":
            written = write_simulated_fastq(genome, profile, count, sys.stdout.buffer)
            sys.stdout.buffer.flush()
        else:
            with open(output_path, "wb") as sink:
                written = write_simulated_fastq(genome, profile, count, sink)
    return written
