"""The temporal offline evaluation loop.

Replays the preprocessed session stream hour by hour: recommenders train
continuously; on each scheduled evaluation hour their state is frozen (and
hash-checked), every session is revealed click by click, each next-click
task ranks the true article among sampled recommendable negatives, and the
four quality metrics accumulate. The evaluated hour is then trained on, so
every session is used for training exactly once.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from ..baselines import rank_candidates
from ..errors import ContractViolation, DataError
from ..popularity import PopularityEstimator
from ..types import Session
from .metrics import TOP_N, coverage_at_n, esi_r_at_n, hr_at_n, mrr_at_n
from .sampling import N_EVAL_NEGATIVES, EvalSample, sample_candidates
from .schedule import bucket_sessions, build_schedule
from .stats import paired_ttest

log = logging.getLogger(__name__)

SAMPLE_METRICS = ("hr", "mrr", "esi_r")


@dataclass
class HourMetrics:
    hour: int
    recommender: str
    n_samples: int
    hr: float
    mrr: float
    esi_r: float
    coverage: float | None


@dataclass
class SignificanceEntry:
    metric: str
    recommender_a: str
    recommender_b: str
    t: float
    p_adjusted: float
    n_sessions: int


@dataclass
class MetricsReport:
    per_hour: list[HourMetrics]
    aggregate: dict[str, dict[str, float]]
    n_samples: int
    n_skipped_empty_pool: int
    n_short_pool: int
    significance: list[SignificanceEntry]
    manifest: dict[str, object] = field(default_factory=dict)


class _Accumulator:
    """Per-recommender metric series, paired by sample order."""

    def __init__(self, name: str):
        self.name = name
        self.values: dict[str, list[float]] = {m: [] for m in SAMPLE_METRICS}
        self.coverages: list[float] = []

    def aggregate(self) -> dict[str, float]:
        out = {m: float(np.mean(v)) if v else float("nan") for m, v in self.values.items()}
        out["coverage"] = float(np.mean(self.coverages)) if self.coverages else float("nan")
        return out


def _session_means(
    values: list[float], session_ids: list[str]
) -> tuple[list[str], np.ndarray]:
    sums: dict[str, float] = {}
    counts: dict[str, int] = {}
    for sid, v in zip(session_ids, values):
        sums[sid] = sums.get(sid, 0.0) + v
        counts[sid] = counts.get(sid, 0) + 1
    ordered = sorted(sums)
    return ordered, np.array([sums[s] / counts[s] for s in ordered])


def run_protocol(
    sessions: list[Session],
    recommenders: list,
    popularity: PopularityEstimator,
    warmup_hours: int = 48,
    eval_every: int = 5,
    n_eval_negatives: int = N_EVAL_NEGATIVES,
    top_n: int = TOP_N,
    seed: int = 7,
    manifest: dict[str, object] | None = None,
) -> MetricsReport:
    names = [r.name for r in recommenders]
    if len(set(names)) != len(names):
        raise DataError(f"duplicate recommender names in roster: {names}")

    buckets, _ = bucket_sessions(sessions)
    schedule = build_schedule(len(buckets), warmup_hours, eval_every)
    rng = np.random.default_rng(seed)

    accumulators = {r.name: _Accumulator(r.name) for r in recommenders}
    sample_session_ids: list[str] = []
    per_hour: list[HourMetrics] = []
    n_samples = 0
    n_skipped = 0
    n_short = 0

    def train_hour(h: int) -> None:
        pool = sorted(buckets[h - 1].clicked_articles) if h > 0 else []
        for session in buckets[h].sessions:
            for rec in recommenders:
                if hasattr(rec, "submit_session"):
                    rec.submit_session(session, pool, hour=h)
                else:
                    rec.observe_session(session)
            for click in session.clicks:
                popularity.observe(click.article_id)
        for rec in recommenders:
            if hasattr(rec, "flush"):
                rec.flush()

    def evaluate_hour(h: int) -> None:
        nonlocal n_samples, n_skipped, n_short
        pool_counts = buckets[h - 1].click_counts if h > 0 else {}
        pool_set = set(pool_counts)
        recommendable = pool_set
        digests_before = {r.name: r.state_digest() for r in recommenders}
        pop_digest_before = popularity.state_digest()

        hour_samples: list[EvalSample] = []
        top_lists: dict[str, list[list[str]]] = {r.name: [] for r in recommenders}

        for session in buckets[h].sessions:
            viewed = set(session.article_ids)
            tasks: list[tuple[int, EvalSample, float]] = []
            for t in range(1, len(session.clicks)):
                positive = session.clicks[t].article_id
                drawn = sample_candidates(positive, viewed, pool_set, rng, n_eval_negatives)
                if drawn is None:
                    n_skipped += 1
                    continue
                negatives, pool_size = drawn
                sample = EvalSample(
                    session_id=session.session_id,
                    prefix_len=t,
                    positive=positive,
                    negatives=negatives,
                    pool_size=pool_size,
                )
                if sample.short_pool:
                    n_short += 1
                tasks.append((t, sample, session.clicks[t].ts))
            if not tasks:
                continue

            for rec in recommenders:
                if getattr(rec, "sample_aware", False):
                    score_lists = [
                        rec.score_sample(sample, sample.candidate_ids) for _, sample, _ in tasks
                    ]
                elif hasattr(rec, "score_session"):
                    score_lists = rec.score_session(
                        session.clicks,
                        [(t, sample.candidate_ids, now) for t, sample, now in tasks],
                    )
                else:
                    score_lists = [
                        rec.score(session.clicks[:t], sample.candidate_ids, now)
                        for t, sample, now in tasks
                    ]
                for (t, sample, _), scores in zip(tasks, score_lists):
                    ranking = rank_candidates(sample.candidate_ids, scores, pool_counts)
                    sample.rankings[rec.name] = ranking

            for _, sample, _ in tasks:
                hour_samples.append(sample)
                sample_session_ids.append(sample.session_id)
                for rec in recommenders:
                    ranking = sample.rankings[rec.name]
                    acc = accumulators[rec.name]
                    acc.values["hr"].append(hr_at_n(ranking, sample.positive, top_n))
                    acc.values["mrr"].append(mrr_at_n(ranking, sample.positive, top_n))
                    acc.values["esi_r"].append(esi_r_at_n(ranking, popularity, top_n))
                    top_lists[rec.name].append(ranking[:top_n])

        for rec in recommenders:
            if rec.state_digest() != digests_before[rec.name]:
                raise ContractViolation(
                    f"recommender {rec.name!r} mutated state during evaluation hour {h}"
                )
        if popularity.state_digest() != pop_digest_before:
            raise ContractViolation(f"popularity estimator mutated during evaluation hour {h}")

        count = len(hour_samples)
        n_samples += count
        for rec in recommenders:
            acc = accumulators[rec.name]
            cov = coverage_at_n(top_lists[rec.name], recommendable, top_n)
            if cov is not None:
                acc.coverages.append(cov)
            tail = slice(len(acc.values["hr"]) - count, None) if count else slice(0, 0)
            per_hour.append(
                HourMetrics(
                    hour=h,
                    recommender=rec.name,
                    n_samples=count,
                    hr=float(np.mean(acc.values["hr"][tail])) if count else float("nan"),
                    mrr=float(np.mean(acc.values["mrr"][tail])) if count else float("nan"),
                    esi_r=float(np.mean(acc.values["esi_r"][tail])) if count else float("nan"),
                    coverage=cov,
                )
            )

    for step in schedule:
        for h in step.train_hours:
            train_hour(h)
        if step.eval_hour is not None:
            evaluate_hour(step.eval_hour)
            train_hour(step.eval_hour)

    significance: list[SignificanceEntry] = []
    n_pairs = len(list(combinations(names, 2)))
    if n_pairs and n_samples >= 2:
        for metric in SAMPLE_METRICS:
            series = {
                name: _session_means(accumulators[name].values[metric], sample_session_ids)
                for name in names
            }
            for a, b in combinations(names, 2):
                ids_a, vals_a = series[a]
                _, vals_b = series[b]
                if len(vals_a) < 2:
                    continue
                t, p = paired_ttest(vals_a, vals_b, n_comparisons=n_pairs)
                significance.append(
                    SignificanceEntry(
                        metric=metric,
                        recommender_a=a,
                        recommender_b=b,
                        t=t,
                        p_adjusted=p,
                        n_sessions=len(ids_a),
                    )
                )

    return MetricsReport(
        per_hour=per_hour,
        aggregate={name: accumulators[name].aggregate() for name in names},
        n_samples=n_samples,
        n_skipped_empty_pool=n_skipped,
        n_short_pool=n_short,
        significance=significance,
        manifest=manifest or {},
    )
