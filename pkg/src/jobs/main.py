"""
Main entry point for the aligner jobs

One command with a subcommand per job. Runtime settings (log level and
format, worker count, chunk size, engine) come from the environment via
``src.utils.config``; command-line flags override them.

USAGE:
  # Build an index with 20-base seeds
  python -m src.jobs.main index reference.fa reference.snapidx --seed-size 20

  # Simulate 100k reads at 2% sequencing error
  python -m src.jobs.main simulate reference.fa reads.fq --count 100000 --error-rate 0.02

  # Align on 8 worker processes, records in input order
  python -m src.jobs.main align reference.snapidx reads.fq -o out.sam --threads 8 --stable-order

  # Accuracy report for simulated reads
  python -m src.jobs.main eval out.sam --report-json report.json

  # Error-rate sweep on a synthetic 1 Mb genome
  python -m src.jobs.main sweep --experiment error-rate --genome-size 1000000 --output sweep.csv

EXIT CODES:
  0: Success
  1: Usage error
  2: I/O error
  3: Format or validation error
"""

import argparse
import sys
import uuid
from datetime import datetime, timezone
from typing import Any, List, NoReturn, Optional

import pandas as pd

from src.alignment.aligner import AlignerParams
from src.evaluation import experiments
from src.evaluation.harness import DEFAULT_TOLERANCE
from src.index.seed_index import DEFAULT_SEED_SIZE, build_index
from src.jobs.align_job import run_align
from src.jobs.eval_job import run_eval
from src.jobs.index_job import load_reference, run_index
from src.jobs.simulate_job import run_simulate
from src.simulation.simulator import SimProfile, random_genome, short_read_profile
from src.utils.config import Engine, get_config
from src.utils.logging_setup import setup_logging

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2
EXIT_FORMAT = 3

EXPERIMENTS = ("error-rate", "max-hits", "seed-count", "long-read", "seed-stats")


class _ArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that exits with the usage code instead of argparse's 2"""

    def error(self, message: str) -> NoReturn:
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_aligner_flags(parser: argparse.ArgumentParser) -> None:
    group = parser.add_argument_group("aligner parameters")
    group.add_argument("--seed-size", type=int, default=DEFAULT_SEED_SIZE, help="Seed length s")
    group.add_argument("--seeds-to-try", type=int, default=25, help="Seeds per read (n)")
    group.add_argument(
        "--max-dist",
        type=int,
        default=None,
        help="Maximum edit distance (default: 12%% of the read length)",
    )
    group.add_argument("--confidence", type=int, default=2, help="Confidence threshold c")
    group.add_argument("--max-hits", type=int, default=300, help="Ignore seeds with more hits")
    group.add_argument("--bucket-size", type=int, default=32, help="Candidate bucket width")


def _aligner_params(args: argparse.Namespace) -> AlignerParams:
    return AlignerParams(
        seed_size=args.seed_size,
        seeds_to_try=args.seeds_to_try,
        max_distance=args.max_dist,
        confidence_threshold=args.confidence,
        max_hits=args.max_hits,
        bucket_size=args.bucket_size,
    )


def build_parser() -> argparse.ArgumentParser:
    """Parser with one subcommand per job"""
    parser = _ArgumentParser(
        prog="snap-align",
        description="Seed-and-extend short and long read aligner",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument(
        "--log-level",
        choices=["DEBUG", "INFO", "WARNING", "ERROR"],
        default=None,
        help="Override SNAP_LOG_LEVEL",
    )
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_ArgumentParser)

    index = subparsers.add_parser("index", help="Build a seed index from FASTA")
    index.add_argument("fasta", help="Reference FASTA (plain or gzip)")
    index.add_argument("output", help="Index file to write")
    index.add_argument("--seed-size", type=int, default=DEFAULT_SEED_SIZE, help="Seed length s")

    align = subparsers.add_parser("align", help="Align FASTQ reads and write SAM")
    align.add_argument("index", help="Index file")
    align.add_argument("fastq", help="Reads (FASTQ, plain or gzip)")
    align.add_argument("-o", "--output", default="-", help="SAM output (default: stdout)")
    _add_aligner_flags(align)
    align.add_argument("--threads", type=int, default=None, help="Worker processes")
    align.add_argument("--chunk-min", type=int, default=None, help="Smallest chunk in bytes")
    align.add_argument("--stable-order", action="store_true", help="Keep input read order")
    align.add_argument(
        "--engine", choices=[engine.value for engine in Engine], default=None, help="Engine"
    )
    align.add_argument("--reference", default=None, help="Verify the index against this FASTA")
    align.add_argument("--report-json", default=None, help="Write the accuracy report as JSON")

    simulate = subparsers.add_parser("simulate", help="Simulate reads with truth in their names")
    simulate.add_argument("reference", help="Reference FASTA or index file")
    simulate.add_argument("output", help="FASTQ to write ('-' for stdout)")
    simulate.add_argument("--count", type=int, default=10_000, help="Number of reads")
    simulate.add_argument("--read-length", type=int, default=100, help="Read length")
    simulate.add_argument("--snp-rate", type=float, default=0.0009, help="SNP mutation rate")
    simulate.add_argument("--indel-rate", type=float, default=0.0001, help="Indel mutation rate")
    simulate.add_argument("--error-rate", type=float, default=0.02, help="Sequencing error rate")
    simulate.add_argument(
        "--indel-error-fraction",
        type=float,
        default=0.0,
        help="Share of sequencing errors that are indels",
    )
    simulate.add_argument("--rng-seed", type=int, default=0, help="Random seed")

    evaluate = subparsers.add_parser("eval", help="Score SAM output of simulated reads")
    evaluate.add_argument("sam", help="SAM file produced by align")
    evaluate.add_argument("--tolerance", type=int, default=DEFAULT_TOLERANCE, help="Bases")
    evaluate.add_argument("--report-json", default=None, help="Write the report as JSON")

    sweep = subparsers.add_parser("sweep", help="Run an accuracy/speed experiment")
    sweep.add_argument("--experiment", choices=EXPERIMENTS, required=True)
    sweep.add_argument("--reference", default=None, help="FASTA or index (default: synthetic)")
    sweep.add_argument("--genome-size", type=int, default=1_000_000, help="Synthetic genome size")
    sweep.add_argument("--reads", type=int, default=10_000, help="Reads per configuration")
    sweep.add_argument("--error-rate", type=float, default=0.02, help="Sequencing error rate")
    sweep.add_argument("--rng-seed", type=int, default=0, help="Random seed")
    sweep.add_argument("--output", default="-", help="CSV output (default: stdout)")
    _add_aligner_flags(sweep)

    return parser


def _cmd_index(args: argparse.Namespace, logger: Any) -> int:
    run_index(args.fasta, args.seed_size, args.output)
    return EXIT_OK


def _cmd_align(args: argparse.Namespace, logger: Any) -> int:
    config = get_config()
    execution = config.execution
    result = run_align(
        index_path=args.index,
        fastq_path=args.fastq,
        output_path=args.output,
        params=_aligner_params(args),
        threads=args.threads or execution.threads,
        chunk_min_bytes=args.chunk_min or execution.chunk_min_bytes,
        stable_order=args.stable_order,
        engine=Engine(args.engine) if args.engine else execution.engine,
        spark_config=config.spark,
        reference_path=args.reference,
    )
    if result.report is not None:
        print(result.report.to_text(), file=sys.stderr)
        if args.report_json:
            with open(args.report_json, "w", encoding="utf-8") as sink:
                sink.write(result.report.to_json() + "\n")
    return EXIT_OK


def _cmd_simulate(args: argparse.Namespace, logger: Any) -> int:
    profile = SimProfile(
        read_length=args.read_length,
        snp_rate=args.snp_rate,
        indel_mutation_rate=args.indel_rate,
        seq_error_rate=args.error_rate,
        indel_error_fraction=args.indel_error_fraction,
        rng_seed=args.rng_seed,
    )
    run_simulate(args.reference, args.output, args.count, profile)
    return EXIT_OK


def _cmd_eval(args: argparse.Namespace, logger: Any) -> int:
    report = run_eval(args.sam, args.tolerance, args.report_json)
    print(report.to_text())
    return EXIT_OK


def _cmd_sweep(args: argparse.Namespace, logger: Any) -> int:
    params = _aligner_params(args)
    if args.experiment == "seed-stats":
        genome = random_genome(args.genome_size, args.rng_seed)
        seeds = experiments.error_free_seed_fraction(
            genome, args.error_rate, params.seed_size, args.reads, rng_seed=args.rng_seed
        )
        chance = experiments.chance_hit_rate(rng_seed=args.rng_seed)
        frame = pd.DataFrame([seeds.rename("error_free_seeds"), chance.rename("chance_hits")])
    else:
        if args.reference:
            genome = load_reference(args.reference)
        else:
            genome = random_genome(args.genome_size, args.rng_seed)
        index = build_index(genome, params.seed_size)
        profile = short_read_profile(args.error_rate, rng_seed=args.rng_seed)
        if args.experiment == "error-rate":
            frame = experiments.error_rate_sweep(
                genome, index, args.reads, params, rng_seed=args.rng_seed
            )
        elif args.experiment == "max-hits":
            frame = experiments.max_hits_sweep(genome, index, args.reads, params, profile=profile)
        elif args.experiment == "seed-count":
            frame = experiments.seed_count_sweep(genome, index, args.reads, params, profile=profile)
        else:
            frame = experiments.long_read_run(
                genome,
                index,
                args.reads,
                params,
                error_rate=args.error_rate,
                rng_seed=args.rng_seed,
            )

    if args.output == "-":
        frame.to_csv(sys.stdout, index=args.experiment == "seed-stats")
    else:
        frame.to_csv(args.output, index=args.experiment == "seed-stats")
        logger.info("Wrote experiment results", extra={"path": args.output})
    return EXIT_OK


_COMMANDS = {
    "index": _cmd_index,
    "align": _cmd_align,
    "simulate": _cmd_simulate,
    "eval": _cmd_eval,
    "sweep": _cmd_sweep,
}


def run(argv: Optional[List[str]] = None) -> int:
    """Parse ``argv``, run the subcommand and return its exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0) if not isinstance(e.code, str) else EXIT_USAGE

    config = get_config()
    run_id = (
        f"{args.command}-{datetime.now(timezone.utc).strftime('%Y%m%d-%H%M%S')}"
        f"-{uuid.uuid4().hex[:8]}"
    )
    logger = setup_logging(
        log_level=args.log_level or config.logging.level,
        structured=config.logging.structured,
        run_id=run_id,
    )
    logger.info(
        f"Starting {args.command}",
        extra={"job": args.command, "run_id": run_id},
    )

    try:
        return _COMMANDS[args.command](args, logger)
    except OSError as e:
        logger.error(f"{args.command} failed: {e}", extra={"error": str(e)}, exc_info=True)
        return EXIT_IO
    except ValueError as e:
        logger.error(f"{args.command} failed: {e}", extra={"error": str(e)}, exc_info=True)
        return EXIT_FORMAT


def main() -> None:
    """Console entry point"""
    sys.exit(run())


if __name__ == "__main__":
    main()
