"""Temporal offline evaluation: schedule, sampling, metrics, runner."""

from .driver import build_embeddings, build_recommenders, run, run_sessions
from .metrics import ESI_RANK_DISCOUNT, TOP_N, coverage_at_n, esi_r_at_n, hr_at_n, mrr_at_n
from .reference import OracleScorer, RandomScorer
from .runner import HourMetrics, MetricsReport, SignificanceEntry, run_protocol
from .sampling import N_EVAL_NEGATIVES, EvalSample, sample_candidates
from .schedule import HourBucket, ScheduleStep, bucket_sessions, build_schedule, eval_hours
from .stats import SIGNIFICANCE_ALPHA, paired_ttest

__all__ = [
    "build_embeddings",
    "build_recommenders",
    "run",
    "run_sessions",
    "ESI_RANK_DISCOUNT",
    "TOP_N",
    "coverage_at_n",
    "esi_r_at_n",
    "hr_at_n",
    "mrr_at_n",
    "OracleScorer",
    "RandomScorer",
    "HourMetrics",
    "MetricsReport",
    "SignificanceEntry",
    "run_protocol",
    "N_EVAL_NEGATIVES",
    "EvalSample",
    "sample_candidates",
    "HourBucket",
    "ScheduleStep",
    "bucket_sessions",
    "build_schedule",
    "eval_hours",
    "SIGNIFICANCE_ALPHA",
    "paired_ttest",
]
