"""Portal log ingestion: adapters, canonical files, sessionization."""

from .adapters import AdapterSummary, load_adressa, load_g1, parse_field_map, summarize
from .canonical import (
    ARTICLE_FIELDS,
    EVENT_FIELDS,
    IngestStats,
    load_canonical,
    read_articles,
    write_articles,
    write_events,
)
from .sessions import RawSession, build_sessions, preprocess_session, sessionize
from .synthetic import SyntheticCorpus, generate_synthetic

__all__ = [
    "AdapterSummary",
    "load_adressa",
    "load_g1",
    "parse_field_map",
    "summarize",
    "ARTICLE_FIELDS",
    "EVENT_FIELDS",
    "IngestStats",
    "load_canonical",
    "read_articles",
    "write_articles",
    "write_events",
    "RawSession",
    "build_sessions",
    "preprocess_session",
    "sessionize",
    "SyntheticCorpus",
    "generate_synthetic",
]
