"""Article text preparation: title + first sentences of the body, tokenized."""

from __future__ import annotations

import re

from ..types import Article

MAX_BODY_SENTENCES = 12

# A sentence ends at ., ! or ? followed by whitespace.
_SENTENCE_BOUNDARY = re.compile(r"(?<=[.!?])\s+")
# Unicode-aware alphanumeric runs; underscores count as punctuation here.
_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)


def split_sentences(text: str, limit: int = MAX_BODY_SENTENCES) -> list[str]:
    """Split on punctuation-plus-whitespace boundaries and keep the first
    `limit` sentences. A trailing fragment without closing punctuation still
    counts as a sentence."""
    stripped = text.strip()
    if not stripped:
        return []
    return _SENTENCE_BOUNDARY.split(stripped)[:limit]


def tokenize(text: str) -> list[str]:
    """Lowercase and strip punctuation, returning alphanumeric tokens."""
    return _TOKEN.findall(text.lower())


def prepare_text(article: Article) -> list[str]:
    """Token sequence for content encoders: title tokens followed by the
    tokens of the body's first 12 sentences."""
    tokens = tokenize(article.title)
    for sentence in split_sentences(article.body):
        tokens.extend(tokenize(sentence))
    return tokens
