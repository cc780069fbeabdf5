"""Continuously-updatable non-neural recommenders.

All recommenders share one contract: `observe_session` (or per-click
`observe` for the popularity window) updates state incrementally; `score`
is read-only and returns one score per candidate, higher = better. Ranking
ties are broken by recent popularity, then article id, via
`rank_candidates` so every recommender ranks deterministically.
"""

from __future__ import annotations

import hashlib
import struct
from collections import deque
from dataclasses import dataclass, field
from math import sqrt
from pathlib import Path
from typing import Iterable, Mapping, Protocol

import numpy as np

from .errors import DataError
from .types import ClickEvent, Session

RP_WINDOW_SECONDS = 3600.0


@dataclass
class ScoredCandidates:
    candidate_ids: list[str]
    scores: np.ndarray

    def __post_init__(self) -> None:
        if len(self.candidate_ids) != len(self.scores):
            raise ValueError("scores and candidates length mismatch")


def rank_candidates(
    candidate_ids: list[str],
    scores: np.ndarray,
    recent_popularity: Mapping[str, int] | None = None,
) -> list[str]:
    """Deterministic ranking: score desc, recent popularity desc, id asc."""
    pop = recent_popularity or {}
    order = sorted(
        range(len(candidate_ids)),
        key=lambda i: (-scores[i], -pop.get(candidate_ids[i], 0), candidate_ids[i]),
    )
    return [candidate_ids[i] for i in order]


class Recommender(Protocol):
    name: str

    def observe_session(self, session: Session) -> None: ...

    def score(self, prefix: tuple[ClickEvent, ...], candidate_ids: list[str], now: float) -> np.ndarray: ...

    def state_digest(self) -> bytes: ...


def _digest_items(items: Iterable[tuple]) -> bytes:
    h = hashlib.blake2b(digest_size=16)
    for item in items:
        h.update(repr(item).encode())
    return h.digest()


class PairCoCounter:
    """Unordered co-click pair counts, shared by CO and Item-kNN.

    Keeps per-item neighbour maps and squared norms in sync so cosine
    scoring is O(min-degree) without recomputing norms.
    """

    def __init__(self) -> None:
        self.neighbours: dict[str, dict[str, int]] = {}
        self._sq_norms: dict[str, float] = {}

    def observe_session(self, session: Session) -> None:
        ids = session.article_ids
        for i in range(len(ids)):
            for j in range(i + 1, len(ids)):
                self._bump(ids[i], ids[j])
                self._bump(ids[j], ids[i])

    def _bump(self, a: str, b: str) -> None:
        row = self.neighbours.setdefault(a, {})
        c = row.get(b, 0)
        row[b] = c + 1
        self._sq_norms[a] = self._sq_norms.get(a, 0.0) + 2 * c + 1

    def pair_count(self, a: str, b: str) -> int:
        return self.neighbours.get(a, {}).get(b, 0)

    def norm(self, a: str) -> float:
        return sqrt(self._sq_norms.get(a, 0.0))

    def cosine(self, a: str, b: str) -> float:
        va = self.neighbours.get(a)
        vb = self.neighbours.get(b)
        if not va or not vb:
            return 0.0
        if len(vb) < len(va):
            va, vb = vb, va
        dot = sum(c * vb[k] for k, c in va.items() if k in vb)
        if dot == 0:
            return 0.0
        return dot / (self.norm(a) * self.norm(b))

    def state_digest(self) -> bytes:
        return _digest_items(
            (a, tuple(sorted(row.items()))) for a, row in sorted(self.neighbours.items())
        )


@dataclass
class CoOccurrence:
    """Scores candidates by how often they were viewed together with the
    last read article, over whole sessions."""

    pairs: PairCoCounter = field(default_factory=PairCoCounter)
    name: str = "co"

    def observe_session(self, session: Session) -> None:
        self.pairs.observe_session(session)

    def score(self, prefix, candidate_ids, now=0.0) -> np.ndarray:
        last = prefix[-1].article_id
        return np.array([float(self.pairs.pair_count(last, c)) for c in candidate_ids])

    def state_digest(self) -> bytes:
        return self.pairs.state_digest()


@dataclass
class SequentialRules:
    """Directed size-two rules weighted by inverse in-session distance."""

    rules: dict[tuple[str, str], float] = field(default_factory=dict)
    name: str = "sr"

    def observe_session(self, session: Session) -> None:
        ids = session.article_ids
        for p in range(len(ids)):
            for q in range(p + 1, len(ids)):
                key = (ids[p], ids[q])
                self.rules[key] = self.rules.get(key, 0.0) + 1.0 / (q - p)

    def score(self, prefix, candidate_ids, now=0.0) -> np.ndarray:
        last = prefix[-1].article_id
        return np.array([self.rules.get((last, c), 0.0) for c in candidate_ids])

    def state_digest(self) -> bytes:
        return _digest_items(sorted(self.rules.items()))


@dataclass
class ItemKnn:
    """Cosine similarity between co-occurrence vectors.

    When sharing a CO instance's pair counts, construct with
    `owns_pairs=False` so the shared state is observed exactly once.
    """

    pairs: PairCoCounter
    owns_pairs: bool = True
    name: str = "itemknn"

    def observe_session(self, session: Session) -> None:
        if self.owns_pairs:
            self.pairs.observe_session(session)

    def score(self, prefix, candidate_ids, now=0.0) -> np.ndarray:
        last = prefix[-1].article_id
        return np.array([self.pairs.cosine(last, c) for c in candidate_ids])

    def state_digest(self) -> bytes:
        return self.pairs.state_digest()


class RecentlyPopular:
    """Click counts within a trailing window (default one hour).

    Stale entries are evicted on observe; `score` never mutates state (the
    frozen-state contract), so it discounts the aged-out head of the buffer
    on the fly.
    """

    name = "rp"

    def __init__(self, window_seconds: float = RP_WINDOW_SECONDS):
        self.window = window_seconds
        self._buffer: deque[tuple[float, str]] = deque()
        self._counts: dict[str, int] = {}

    def observe(self, click: ClickEvent, now: float | None = None) -> None:
        now = click.ts if now is None else now
        self._buffer.append((click.ts, click.article_id))
        self._counts[click.article_id] = self._counts.get(click.article_id, 0) + 1
        self._evict(now)

    def observe_session(self, session: Session) -> None:
        for click in session.clicks:
            self.observe(click)

    def _evict(self, now: float) -> None:
        cutoff = now - self.window
        while self._buffer and self._buffer[0][0] <= cutoff:
            _, article_id = self._buffer.popleft()
            left = self._counts[article_id] - 1
            if left:
                self._counts[article_id] = left
            else:
                del self._counts[article_id]

    def window_counts(self, now: float) -> dict[str, int]:
        stale: dict[str, int] = {}
        cutoff = now - self.window
        for ts, article_id in self._buffer:
            if ts > cutoff:
                break
            stale[article_id] = stale.get(article_id, 0) + 1
        if not stale:
            return dict(self._counts)
        return {
            a: c - stale.get(a, 0) for a, c in self._counts.items() if c - stale.get(a, 0) > 0
        }

    def score(self, prefix, candidate_ids, now: float) -> np.ndarray:
        counts = self.window_counts(now)
        return np.array([float(counts.get(c, 0)) for c in candidate_ids])

    def state_digest(self) -> bytes:
        return _digest_items(self._buffer)


class ContentBased:
    """Cosine similarity of content embeddings to the last read article.

    Textless candidates sink to the bottom of the ranking; a textless last
    article yields all-zero scores.
    """

    name = "cb"

    def __init__(self, embeddings):
        self.embeddings = embeddings

    def observe_session(self, session: Session) -> None:
        pass  # state is the pre-trained embedding store

    def score(self, prefix, candidate_ids, now=0.0) -> np.ndarray:
        last_vec = self.embeddings.get(prefix[-1].article_id)
        if last_vec is None:
            return np.zeros(len(candidate_ids))
        scores = np.empty(len(candidate_ids))
        for i, c in enumerate(candidate_ids):
            vec = self.embeddings.get(c)
            scores[i] = -np.inf if vec is None else float(last_vec @ vec)
        return scores

    def state_digest(self) -> bytes:
        return b"cb-static"


# --- binary snapshots (versioned, length-prefixed maps) ---------------------

_MAGIC = b"NRBS"
_VERSION = 1


def _pack_str(s: str) -> bytes:
    raw = s.encode("utf-8")
    return struct.pack("<I", len(raw)) + raw


def _read_str(buf: memoryview, off: int) -> tuple[str, int]:
    (n,) = struct.unpack_from("<I", buf, off)
    off += 4
    return bytes(buf[off : off + n]).decode("utf-8"), off + n


def save_state(recommender, path: str | Path) -> None:
    """Serialize a baseline's state for resumable runs."""
    chunks = [_MAGIC, struct.pack("<I", _VERSION), _pack_str(recommender.name)]
    if isinstance(recommender, (CoOccurrence, ItemKnn)):
        rows = recommender.pairs.neighbours
        chunks.append(struct.pack("<Q", len(rows)))
        for a in sorted(rows):
            chunks.append(_pack_str(a))
            chunks.append(struct.pack("<Q", len(rows[a])))
            for b in sorted(rows[a]):
                chunks.append(_pack_str(b) + struct.pack("<q", rows[a][b]))
    elif isinstance(recommender, SequentialRules):
        chunks.append(struct.pack("<Q", len(recommender.rules)))
        for (a, b), w in sorted(recommender.rules.items()):
            chunks.append(_pack_str(a) + _pack_str(b) + struct.pack("<d", w))
    elif isinstance(recommender, RecentlyPopular):
        chunks.append(struct.pack("<d", recommender.window))
        chunks.append(struct.pack("<Q", len(recommender._buffer)))
        for ts, article_id in recommender._buffer:
            chunks.append(struct.pack("<d", ts) + _pack_str(article_id))
    else:
        raise DataError(f"no snapshot format for recommender {recommender.name!r}")
    Path(path).write_bytes(b"".join(chunks))


def load_state(path: str | Path, embeddings=None):
    """Rebuild a baseline from a snapshot written by `save_state`."""
    raw = Path(path).read_bytes()
    buf = memoryview(raw)
    if bytes(buf[:4]) != _MAGIC:
        raise DataError(f"{path}: not a state snapshot")
    (version,) = struct.unpack_from("<I", buf, 4)
    if version != _VERSION:
        raise DataError(f"{path}: unsupported snapshot version {version}")
    name, off = _read_str(buf, 8)
    if name in ("co", "itemknn"):
        pairs = PairCoCounter()
        (n_rows,) = struct.unpack_from("<Q", buf, off)
        off += 8
        for _ in range(n_rows):
            a, off = _read_str(buf, off)
            (n_cols,) = struct.unpack_from("<Q", buf, off)
            off += 8
            row: dict[str, int] = {}
            sq = 0.0
            for _ in range(n_cols):
                b, off = _read_str(buf, off)
                (c,) = struct.unpack_from("<q", buf, off)
                off += 8
                row[b] = c
                sq += float(c) * c
            pairs.neighbours[a] = row
            pairs._sq_norms[a] = sq
        return CoOccurrence(pairs=pairs) if name == "co" else ItemKnn(pairs=pairs)
    if name == "sr":
        sr = SequentialRules()
        (n_rules,) = struct.unpack_from("<Q", buf, off)
        off += 8
        for _ in range(n_rules):
            a, off = _read_str(buf, off)
            b, off = _read_str(buf, off)
            (w,) = struct.unpack_from("<d", buf, off)
            off += 8
            sr.rules[(a, b)] = w
        return sr
    if name == "rp":
        (window,) = struct.unpack_from("<d", buf, off)
        off += 8
        rp = RecentlyPopular(window_seconds=window)
        (n_items,) = struct.unpack_from("<Q", buf, off)
        off += 8
        for _ in range(n_items):
            (ts,) = struct.unpack_from("<d", buf, off)
            off += 8
            article_id, off = _read_str(buf, off)
            rp._buffer.append((ts, article_id))
            rp._counts[article_id] = rp._counts.get(article_id, 0) + 1
        return rp
    raise DataError(f"{path}: unknown recommender name {name!r} in snapshot")
