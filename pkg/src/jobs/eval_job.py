"""
Eval job: SAM output of simulated reads -> accuracy report
"""

import logging
from typing import Iterator, Optional

from src.evaluation.harness import (
    DEFAULT_TOLERANCE,
    AlignmentCall,
    EvalReport,
    compile_report,
    score_calls,
)
from src.formats.sam import parse_sam_line
from src.utils.logging_setup import log_execution_time

logger = logging.getLogger(__name__)


def _calls(sam_path: str) -> Iterator[AlignmentCall]:
    with open(sam_path, "r", encoding="utf-8") as handle:
        for line in handle:
            if line.startswith("@") or not line.strip():
                continue
            yield AlignmentCall.from_sam(parse_sam_line(line))


def run_eval(
    sam_path: str,
    tolerance: int = DEFAULT_TOLERANCE,
    report_json: Optional[str] = None,
    elapsed_seconds: Optional[float] = None,
) -> EvalReport:
    """
    Score every record of ``sam_path`` against the truth in its read name

    Raises:
        ValueError: malformed SAM or a file without alignment records
    """
    with log_execution_time(logger, "Evaluation", path=sam_path):
        report = compile_report(score_calls(_calls(sam_path), tolerance), elapsed_seconds)

    if report_json:
        with open(report_json, "w", encoding="utf-8") as sink:
            sink.write(report.to_json() + "\n")
        logger.info("Wrote JSON report", extra={"path": report_json})
    return report
