"""
Accuracy and speed experiments over simulated reads

Every experiment simulates reads from a reference, aligns them on one worker
with ``align_read``, scores them against the truth in the read names and
returns a pandas DataFrame with one row per configuration.

EXPERIMENTS:
- error_rate_sweep: short reads at several sequencing error rates
- max_hits_sweep: accuracy against throughput as h_max grows
- seed_count_sweep: accuracy as more seeds are tried per read
- long_read_run: long reads where a fifth of the errors are indels
- error_free_seed_fraction / chance_hit_rate: seed statistics checked
  against their closed-form expectations

Rows are meant to be written with ``DataFrame.to_csv``; the ``sweep``
subcommand does exactly that.
"""

import logging
import math
import time
from typing import Dict, Iterable, List, Optional, Union

import numpy as np
import pandas as pd

from src.alignment.aligner import AlignerParams, AlignmentStats, align_read
from src.evaluation.harness import (
    DEFAULT_TOLERANCE,
    AlignmentCall,
    ScoredRead,
    compile_report,
    score_result,
)
from src.genome.reference import PackedGenome, reverse_complement
from src.index.seed_index import Direction, SeedIndex, build_index
from src.simulation.simulator import (
    SimProfile,
    long_read_profile,
    random_genome,
    short_read_profile,
    simulate,
)
from src.utils.logging_setup import log_execution_time

logger = logging.getLogger(__name__)

ERROR_RATES = (0.02, 0.05, 0.10)
MAX_HITS_VALUES = (10, 30, 100, 300, 1000)
SEED_COUNTS = (5, 10, 15, 25)

Row = Dict[str, Union[str, int, float, None]]


def run_profile(
    genome: PackedGenome,
    index: SeedIndex,
    profile: SimProfile,
    count: int,
    params: AlignerParams,
    tolerance: int = DEFAULT_TOLERANCE,
    label: str = "",
) -> Row:
    """Simulate, align and score one configuration; returns a report row"""
    reads = list(simulate(genome, profile, count))
    stats = AlignmentStats()
    scored: List[ScoredRead] = []

    start = time.perf_counter()
    results = [align_read(sim.read, index, genome, params, stats) for sim in reads]
    elapsed = time.perf_counter() - start

    for sim, result in zip(reads, results):
        call = AlignmentCall.from_result(sim.read.name, result, genome)
        scored.append(ScoredRead(result.kind, score_result(call, sim.truth, tolerance)))

    report = compile_report(scored, elapsed, stats.to_dict())
    error = report.error_fraction
    return {
        "label": label,
        "read_length": profile.read_length,
        "error_rate": profile.seq_error_rate,
        "indel_error_fraction": profile.indel_error_fraction,
        "seed_size": params.seed_size,
        "seeds_to_try": params.seeds_to_try,
        "max_hits": params.max_hits,
        "reads": report.total_reads,
        "aligned_pct": float(report.aligned_fraction),
        "error_pct": None if error is None else float(error),
        "reads_per_second": report.throughput,
        "distance_calls_per_read": stats.distance_calls / report.total_reads,
        "early_return_rate": stats.early_return_rate,
        "first_candidate_best_rate": stats.first_candidate_best_rate,
    }


def error_rate_sweep(
    genome: PackedGenome,
    index: SeedIndex,
    count: int,
    params: Optional[AlignerParams] = None,
    rates: Iterable[float] = ERROR_RATES,
    read_length: int = 100,
    rng_seed: int = 0,
) -> pd.DataFrame:
    params = params or AlignerParams(seed_size=index.seed_size)
    rows = []
    for rate in rates:
        with log_execution_time(logger, f"Error rate {rate:.2%}", reads=count):
            profile = short_read_profile(rate, read_length, rng_seed)
            rows.append(run_profile(genome, index, profile, count, params, label=f"error={rate}"))
    return pd.DataFrame(rows)


def max_hits_sweep(
    genome: PackedGenome,
    index: SeedIndex,
    count: int,
    params: Optional[AlignerParams] = None,
    values: Iterable[int] = MAX_HITS_VALUES,
    profile: Optional[SimProfile] = None,
) -> pd.DataFrame:
    """Same reads aligned with each h_max value"""
    base = params or AlignerParams(seed_size=index.seed_size)
    profile = profile or short_read_profile(0.02)
    rows = []
    for value in values:
        with log_execution_time(logger, f"max_hits={value}", reads=count):
            tuned = base.model_copy(update={"max_hits": value})
            label = f"max_hits={value}"
            rows.append(run_profile(genome, index, profile, count, tuned, label=label))
    return pd.DataFrame(rows)


def seed_count_sweep(
    genome: PackedGenome,
    index: SeedIndex,
    count: int,
    params: Optional[AlignerParams] = None,
    values: Iterable[int] = SEED_COUNTS,
    profile: Optional[SimProfile] = None,
) -> pd.DataFrame:
    base = params or AlignerParams(seed_size=index.seed_size)
    profile = profile or short_read_profile(0.02)
    rows = []
    for value in values:
        tuned = base.model_copy(update={"seeds_to_try": value})
        rows.append(run_profile(genome, index, profile, count, tuned, label=f"seeds={value}"))
    return pd.DataFrame(rows)


def long_read_run(
    genome: PackedGenome,
    index: SeedIndex,
    count: int,
    params: Optional[AlignerParams] = None,
    error_rate: float = 0.05,
    read_length: int = 1000,
    rng_seed: int = 0,
) -> pd.DataFrame:
    params = params or AlignerParams(seed_size=index.seed_size)
    profile = long_read_profile(error_rate, read_length, rng_seed)
    with log_execution_time(logger, "Long read run", reads=count):
        row = run_profile(genome, index, profile, count, params, label="long")
    return pd.DataFrame([row])


def error_free_seed_fraction(
    genome: PackedGenome,
    error_rate: float,
    seed_size: int,
    reads: int,
    read_length: int = 100,
    rng_seed: int = 0,
) -> pd.Series:
    """
    Share of non-overlapping read seeds without a sequencing error

    Only substitution errors are simulated, so a seed is error-free exactly
    when it equals the reference at the truth locus. Expected value is
    (1 - e)^s.
    """
    profile = SimProfile(
        read_length=read_length,
        snp_rate=0.0,
        indel_mutation_rate=0.0,
        seq_error_rate=error_rate,
        rng_seed=rng_seed,
    )
    clean = total = 0
    for sim in simulate(genome, profile, reads):
        bases = sim.read.bases
        if sim.truth.direction is Direction.REVERSE:
            bases = reverse_complement(bases)
        origin = genome.to_global(sim.truth.contig, sim.truth.position)
        reference = genome.substring(origin, read_length)
        for offset in range(0, read_length - seed_size + 1, seed_size):
            total += 1
            clean += bases[offset : offset + seed_size] == reference[offset : offset + seed_size]

    expected = (1.0 - error_rate) ** seed_size
    return pd.Series(
        {
            "seeds": total,
            "observed": clean / total,
            "expected": expected,
            "sigma": math.sqrt(expected * (1.0 - expected) / total),
        }
    )


def chance_hit_rate(
    genome_length: int = 4**10, seed_size: int = 8, samples: int = 10_000, rng_seed: int = 0
) -> pd.Series:
    """
    Mean forward-strand hits of a random seed in a random genome

    Expected value is (L - s + 1) / 4^s; the per-seed count is close to
    Poisson, so sigma of the mean is sqrt(expected / samples).
    """
    genome = random_genome(genome_length, rng_seed)
    index = build_index(genome, seed_size)
    rng = np.random.default_rng(rng_seed + 1)
    seeds = np.frombuffer(b"ACGT", dtype=np.uint8)[rng.integers(0, 4, size=(samples, seed_size))]
    hits = [index.lookup_bytes(row.tobytes())[0].size for row in seeds]

    expected = (genome_length - seed_size + 1) / 4**seed_size
    return pd.Series(
        {
            "samples": samples,
            "observed": float(np.mean(hits)),
            "expected": expected,
            "sigma": math.sqrt(expected / samples),
        }
    )
