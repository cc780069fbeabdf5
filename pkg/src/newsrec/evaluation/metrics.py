"""Ranking quality metrics at a list-length cutoff.

Accuracy: hit rate and mean reciprocal rank of the true next article within
the top n of the candidate ranking. Coverage: distinct recommended articles
over the recommendable set, per evaluation hour. Novelty: rank-discounted
self-information of the recommended items (discount 0.85^(k-1)).
"""

from __future__ import annotations

from typing import Iterable, Sequence

from ..errors import ContractViolation
from ..popularity import PopularityEstimator

TOP_N = 10
ESI_RANK_DISCOUNT = 0.85


def hr_at_n(ranking: Sequence[str], positive: str, n: int = TOP_N) -> int:
    """1 iff the positive ranks within the top n."""
    try:
        rank = ranking.index(positive) + 1
    except ValueError:
        raise ContractViolation(
            f"positive {positive!r} missing from ranking (protocol bug)"
        ) from None
    return 1 if rank <= n else 0


def mrr_at_n(ranking: Sequence[str], positive: str, n: int = TOP_N) -> float:
    """1/rank of the positive when it ranks within top n, else 0."""
    try:
        rank = ranking.index(positive) + 1
    except ValueError:
        raise ContractViolation(
            f"positive {positive!r} missing from ranking (protocol bug)"
        ) from None
    return 1.0 / rank if rank <= n else 0.0


def coverage_at_n(
    top_lists: Iterable[Sequence[str]], recommendable: set[str], n: int = TOP_N
) -> float | None:
    """Distinct articles appearing in any top-n list, divided by the number
    of recommendable articles; None when nothing was recommendable."""
    if not recommendable:
        return None
    shown: set[str] = set()
    for ranking in top_lists:
        shown.update(ranking[:n])
    return len(shown & recommendable) / len(recommendable)


def esi_r_at_n(
    ranking: Sequence[str], popularity: PopularityEstimator, n: int = TOP_N
) -> float:
    """Rank-discounted expected self-information of the top n items."""
    top = ranking[:n]
    num = 0.0
    den = 0.0
    disc = 1.0
    for item in top:
        num += disc * popularity.self_information(item)
        den += disc
        disc *= ESI_RANK_DISCOUNT
    return num / den if den else 0.0
