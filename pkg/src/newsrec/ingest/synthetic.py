"""Deterministic synthetic portal corpus with learnable content signal.

Articles belong to topics with topic-concentrated vocabularies and staggered
publish times. Users stick to a topic; within a session, clicks follow a
mixture of (a) a per-topic "story chain" (publish-order successor of the last
article), (b) topic-affine recency-weighted popularity, and (c) global
recency-weighted popularity. Sequence-aware recommenders can exploit (a),
co-occurrence models (a)+(b), content models the topic structure, and
popularity models only (c) — which is what the desk-scale directional checks
need.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..types import Article, ClickEvent

# Mixture weights for picking the next click within a session.
P_CHAIN = 0.60
P_TOPIC = 0.30
# Probability the first click (and topic-affine picks) stay on the user's topic.
P_STICK = 0.85
# Readers mostly move toward fresher articles: a non-chain pick published
# before the article just read is only accepted with this probability.
P_BACKWARD = 0.15
# Fraction of users that scan long and topically diffuse sessions (the
# outlier/bot behaviour real portals see; sessions cap at 20 clicks).
SCANNER_FRACTION = 0.08
# Probability an article's category label equals its topic (the rest is noise,
# so the category feature alone underdetermines the topic).
P_CATEGORY_MATCH = 0.25

CHAIN_LENGTH = 5
ATTRACTIVENESS_HALFLIFE_HOURS = 18.0
BACKLOG_SECONDS = 2 * 86400  # articles published before the click stream starts

DEVICES = ("mobile", "desktop", "tablet")
DEVICE_PROBS = (0.6, 0.3, 0.1)
OSES = ("android", "ios", "linux")
OS_PROBS = (0.5, 0.35, 0.15)
REFERRERS = ("direct", "search", "social", "internal")
REFERRER_PROBS = (0.4, 0.3, 0.2, 0.1)

# Day-aligned epoch so hour-of-day features line up with the diurnal profile.
EPOCH_START = 1_600_000_000 - (1_600_000_000 % 86400)


@dataclass
class SyntheticCorpus:
    events: list[ClickEvent]
    articles: list[Article]
    n_sessions: int


def _diurnal_weights() -> np.ndarray:
    hours = np.arange(24)
    return 0.5 + 0.25 * (1.0 + np.cos(2.0 * np.pi * (hours - 15) / 24.0))


def _article_text(rng: np.random.Generator, topic_vocab: list[str], shared_vocab: list[str]) -> tuple[str, str]:
    def draw_tokens(n: int) -> list[str]:
        tokens = []
        for _ in range(n):
            if rng.random() < 0.85:
                tokens.append(topic_vocab[rng.integers(len(topic_vocab))])
            else:
                tokens.append(shared_vocab[rng.integers(len(shared_vocab))])
        return tokens

    title = " ".join(draw_tokens(int(rng.integers(4, 9))))
    sentences = [
        " ".join(draw_tokens(int(rng.integers(5, 13))))
        for _ in range(int(rng.integers(6, 11)))
    ]
    return title, ". ".join(sentences) + "."


class _AttractivenessSampler:
    """Recency-decayed quality sampling, quantized to hour buckets."""

    def __init__(self, publish_ts: np.ndarray, quality: np.ndarray, topics: np.ndarray):
        self.publish_ts = publish_ts
        self.quality = quality
        self.topics = topics
        order = np.argsort(publish_ts, kind="stable")
        self._pub_sorted = publish_ts[order]
        self._idx_sorted = order
        self._cache: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}

    def _table(self, hour: int, topic: int) -> tuple[np.ndarray, np.ndarray]:
        key = (hour, topic)
        hit = self._cache.get(key)
        if hit is not None:
            return hit
        now = hour * 3600.0
        n_alive = int(np.searchsorted(self._pub_sorted, now, side="right"))
        alive = self._idx_sorted[:n_alive]
        if topic >= 0:
            alive = alive[self.topics[alive] == topic]
        if alive.size == 0:
            table = (alive, np.empty(0))
        else:
            ages_h = (now - self.publish_ts[alive]) / 3600.0
            weights = self.quality[alive] * np.exp(-ages_h / ATTRACTIVENESS_HALFLIFE_HOURS)
            table = (alive, np.cumsum(weights))
        self._cache[key] = table
        return table

    def sample(
        self,
        rng: np.random.Generator,
        ts: float,
        topic: int,
        exclude: set[int],
        after_pub: float | None = None,
    ) -> int | None:
        """Draw by attractiveness; when `after_pub` is given, picks published
        before it are mostly rejected (forward-in-time reading)."""
        alive, cumw = self._table(int(ts // 3600), topic)
        if alive.size == 0 or cumw[-1] <= 0:
            return None
        for _ in range(12):
            u = rng.random() * cumw[-1]
            pick = int(alive[min(np.searchsorted(cumw, u, side="right"), alive.size - 1)])
            if pick in exclude:
                continue
            if (
                after_pub is not None
                and self.publish_ts[pick] <= after_pub
                and rng.random() >= P_BACKWARD
            ):
                continue
            return pick
        for pick in alive[::-1]:  # newest-first fallback scan
            if int(pick) not in exclude:
                return int(pick)
        return None


def generate_synthetic(
    n_topics: int,
    n_articles: int,
    n_users: int,
    days: int,
    seed: int,
    mean_sessions_per_user: float = 3.25,
) -> SyntheticCorpus:
    """Build a full synthetic corpus; byte-identical output per seed."""
    if min(n_topics, n_articles, n_users, days) < 1:
        raise ValueError("all synthetic corpus counts must be >= 1")
    rng = np.random.default_rng(seed)
    span = days * 86400.0

    shared_vocab = [f"common{j}" for j in range(100)]
    topic_vocabs = [[f"t{t}w{j}" for j in range(150)] for t in range(n_topics)]

    topics = np.arange(n_articles) % n_topics
    publish_ts = rng.uniform(-BACKLOG_SECONDS, span, size=n_articles)
    quality = rng.lognormal(mean=0.0, sigma=1.0, size=n_articles)

    articles: list[Article] = []
    for i in range(n_articles):
        topic = int(topics[i])
        category = topic if rng.random() < P_CATEGORY_MATCH else int(rng.integers(n_topics))
        title, body = _article_text(rng, topic_vocabs[topic], shared_vocab)
        articles.append(
            Article(
                article_id=f"a{i:05d}",
                published_at=float(EPOCH_START + publish_ts[i]),
                category_id=category,
                author_id=None,
                title=title,
                body=body,
            )
        )

    # Story chains: consecutive same-topic articles in publish order, in
    # groups of CHAIN_LENGTH. successor[i] = next article of the chain.
    successor = np.full(n_articles, -1, dtype=np.int64)
    for t in range(n_topics):
        members = np.where(topics == t)[0]
        members = members[np.argsort(publish_ts[members], kind="stable")]
        for pos in range(len(members) - 1):
            if (pos + 1) % CHAIN_LENGTH != 0:
                successor[members[pos]] = members[pos + 1]

    sampler = _AttractivenessSampler(publish_ts, quality, topics)

    diurnal = _diurnal_weights()
    diurnal_probs = diurnal / diurnal.sum()

    events: list[ClickEvent] = []
    n_sessions = 0
    for u in range(n_users):
        user_id = f"u{u:06d}"
        user_topic = int(rng.integers(n_topics))
        is_scanner = rng.random() < SCANNER_FRACTION
        n_sess = 1 + int(rng.poisson(max(mean_sessions_per_user - 1.0, 0.0)))
        starts = np.sort(
            rng.integers(0, days, size=n_sess) * 86400.0
            + rng.choice(24, size=n_sess, p=diurnal_probs) * 3600.0
            + rng.uniform(0, 3600.0, size=n_sess)
        )
        prev_end = -np.inf
        for start in starts:
            start = float(max(start, prev_end + 1860.0 + rng.exponential(1800.0)))
            if start >= span - 3600.0:
                break
            if is_scanner:
                length = int(rng.integers(10, 21))
            else:
                length = min(2 + int(rng.geometric(0.55)) - 1, 20)
            device = DEVICES[rng.choice(3, p=DEVICE_PROBS)]
            op_sys = OSES[rng.choice(3, p=OS_PROBS)]
            referrer = REFERRERS[rng.choice(4, p=REFERRER_PROBS)]

            chosen: set[int] = set()
            clicks: list[ClickEvent] = []
            ts = float(start)
            last = -1
            while len(clicks) < length and ts < span:
                pick: int | None = None
                if is_scanner or last < 0:
                    topic = -1 if is_scanner or rng.random() >= P_STICK else user_topic
                    pick = sampler.sample(rng, ts, topic, chosen)
                else:
                    last_pub = float(publish_ts[last])
                    r = rng.random()
                    if r < P_CHAIN:
                        nxt = int(successor[last])
                        if nxt >= 0 and nxt not in chosen and publish_ts[nxt] <= ts:
                            pick = nxt
                    if pick is None and r < P_CHAIN + P_TOPIC:
                        pick = sampler.sample(rng, ts, user_topic, chosen, after_pub=last_pub)
                    if pick is None:
                        pick = sampler.sample(rng, ts, -1, chosen, after_pub=last_pub)
                if pick is None:
                    break
                chosen.add(pick)
                clicks.append(
                    ClickEvent(
                        user_id=user_id,
                        article_id=f"a{pick:05d}",
                        ts=float(EPOCH_START + ts),
                        device=device,
                        os=op_sys,
                        referrer=referrer,
                    )
                )
                last = pick
                gap_cap = 240.0 if is_scanner else 1440.0
                ts += 30.0 + float(min(rng.exponential(90.0 if is_scanner else 180.0), gap_cap))
            if len(clicks) >= 2:
                events.extend(clicks)
                n_sessions += 1
                prev_end = clicks[-1].ts - EPOCH_START
            elif clicks:
                prev_end = clicks[-1].ts - EPOCH_START

    events.sort(key=lambda e: (e.ts, e.user_id, e.article_id))
    return SyntheticCorpus(events=events, articles=articles, n_sessions=n_sessions)
