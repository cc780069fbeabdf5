"""Config-driven experiment execution: wiring, the protocol run, reports."""

from __future__ import annotations

import logging
from pathlib import Path

from .. import __version__
from ..baselines import (
    ContentBased,
    CoOccurrence,
    ItemKnn,
    PairCoCounter,
    RecentlyPopular,
    SequentialRules,
)
from ..config import RunConfig
from ..content import EmbeddingStore, encode_corpus, load_word_vectors
from ..errors import ConfigError
from ..ingest import build_sessions, load_canonical
from ..nar import FeatureSpec, Featurizer, NarRecommender
from ..nar.kernels import get_backend
from ..popularity import PopularityEstimator
from ..types import Catalog, ClickEvent, Session
from .reference import OracleScorer, RandomScorer
from .reports import write_hourly_csv, write_json_aggregate, write_plot_data
from .runner import MetricsReport, run_protocol

log = logging.getLogger(__name__)


def build_embeddings(config: RunConfig, catalog: Catalog) -> EmbeddingStore | None:
    if config.embeddings_path:
        store, _ = EmbeddingStore.load(config.embeddings_path)
        return store
    if config.encoder_name == "none":
        return None
    word_table = None
    if config.encoder_name == "w2v_tfidf":
        word_table = load_word_vectors(config.encoder_word_vectors)
    log.info("fitting %s encoder (dim=%d)", config.encoder_name, config.encoder_dim)
    return encode_corpus(
        config.encoder_name,
        catalog,
        dim=config.encoder_dim,
        seed=config.encoder_seed,
        word_table=word_table,
        doc2vec_epochs=config.encoder_doc2vec_epochs,
        doc2vec_negatives=config.encoder_doc2vec_negatives,
    )


def context_vocabularies(events: list[ClickEvent]) -> dict[str, list[str]]:
    return {
        "device": sorted({e.device for e in events if e.device}),
        "os": sorted({e.os for e in events if e.os}),
        "referrer": sorted({e.referrer for e in events if e.referrer}),
    }


def _build_nar(
    config: RunConfig,
    catalog: Catalog,
    embeddings: EmbeddingStore | None,
    popularity: PopularityEstimator,
    context_values: dict[str, list[str]],
    use_ace: bool,
    seed: int,
) -> NarRecommender:
    has_author = any(a.author_id is not None for a in catalog)
    spec = FeatureSpec(
        use_ace=use_ace,
        d_ace=embeddings.dim if (use_ace and embeddings is not None) else 0,
        category_dim=config.nar_category_dim,
        author_dim=config.nar_author_dim,
        context_dim=config.nar_context_dim,
        with_author=has_author and config.nar_author_dim > 0,
    )
    if use_ace and (embeddings is None or embeddings.dim == 0):
        raise ConfigError("content-aware ranker requested but no embeddings are available")
    featurizer = Featurizer(
        spec,
        catalog,
        embeddings if use_ace else None,
        popularity,
        context_values,
        seed=seed,
    )
    label = config.encoder_name if use_ace else "No-ACE"
    return NarRecommender(
        featurizer,
        hidden=config.nar_hidden,
        scorer_hidden=config.nar_scorer_hidden,
        lr=config.nar_lr,
        batch_size=config.nar_batch,
        n_train_negatives=config.nar_train_negatives,
        seed=seed,
        name=f"nar:{label}",
    )


def build_recommenders(
    config: RunConfig,
    catalog: Catalog,
    embeddings: EmbeddingStore | None,
    popularity: PopularityEstimator,
    events: list[ClickEvent],
) -> list:
    context_values = context_vocabularies(events)
    roster: list = []
    shared_pairs: PairCoCounter | None = None
    co_present = "co" in config.recommenders
    for name in config.recommenders:
        if name == "co":
            shared_pairs = shared_pairs or PairCoCounter()
            roster.append(CoOccurrence(pairs=shared_pairs))
        elif name == "itemknn":
            if co_present:
                shared_pairs = shared_pairs or PairCoCounter()
                roster.append(ItemKnn(pairs=shared_pairs, owns_pairs=False))
            else:
                roster.append(ItemKnn(pairs=PairCoCounter()))
        elif name == "sr":
            roster.append(SequentialRules())
        elif name == "rp":
            roster.append(RecentlyPopular())
        elif name == "cb":
            if embeddings is None:
                raise ConfigError("cb requires content embeddings")
            roster.append(ContentBased(embeddings))
        elif name == "nar":
            roster.append(
                _build_nar(
                    config, catalog, embeddings, popularity, context_values,
                    use_ace=config.nar_use_ace, seed=config.nar_seed,
                )
            )
        elif name == "nar_noace":
            roster.append(
                _build_nar(
                    config, catalog, embeddings, popularity, context_values,
                    use_ace=False, seed=config.nar_seed + 1,
                )
            )
        elif name == "random":
            roster.append(RandomScorer(seed=config.protocol_seed))
        elif name == "oracle":
            roster.append(OracleScorer())
        else:  # config.validate() already rejects these
            raise ConfigError(f"unknown recommender {name!r}")
    return roster


def run(config: RunConfig, write_outputs: bool = True) -> MetricsReport:
    """Execute the full protocol described by a validated config."""
    config.validate()
    events, catalog, stats = load_canonical(config.dataset_events, config.dataset_articles)
    sessions = build_sessions(events)
    log.info(
        "loaded %d events -> %d sessions (%d dropped, %d malformed)",
        stats.emitted,
        len(sessions),
        stats.dropped_unresolved,
        stats.malformed,
    )
    embeddings = build_embeddings(config, catalog)
    popularity = PopularityEstimator()
    recommenders = build_recommenders(config, catalog, embeddings, popularity, events)
    manifest = {
        "config": config.to_text(),
        "package_version": __version__,
        "kernel_backend": get_backend().NAME,
        "n_sessions": len(sessions),
        "n_articles": len(catalog),
        "encoder": config.encoder_name,
        "embedding_dim": embeddings.dim if embeddings is not None else 0,
    }
    report = run_protocol(
        sessions,
        recommenders,
        popularity,
        warmup_hours=config.protocol_warmup_hours,
        eval_every=config.protocol_eval_every,
        n_eval_negatives=config.protocol_n_eval_negatives,
        top_n=config.protocol_top_n,
        seed=config.protocol_seed,
        manifest=manifest,
    )
    if write_outputs:
        out = Path(config.output_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_hourly_csv(report, out / "hourly.csv")
        write_plot_data(report, out / "plot_data.csv")
        write_json_aggregate(report, out / "aggregate.json")
        (out / "run_manifest.txt").write_text(
            "".join(
                f"{k}={v}\n" if k != "config" else f"# --- config ---\n{v}# --- end config ---\n"
                for k, v in manifest.items()
            ),
            encoding="utf-8",
        )
    return report


def run_sessions(
    sessions: list[Session],
    recommenders: list,
    popularity: PopularityEstimator,
    **kwargs,
) -> MetricsReport:
    """Thin alias for callers that assembled everything themselves."""
    return run_protocol(sessions, recommenders, popularity, **kwargs)
