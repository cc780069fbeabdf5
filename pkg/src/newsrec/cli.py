"""Command-line interface: ingest, encode, run, report.

Exit codes: 0 success, 2 configuration error, 3 data error, 4 internal
contract violation. No environment variables are consulted.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import RunConfig
from .content import EmbeddingStore, encode_corpus, load_word_vectors
from .errors import ConfigError, ContractViolation, DataError
from .evaluation import driver
from .evaluation.reports import format_aggregate_table
from .ingest import (
    generate_synthetic,
    load_adressa,
    load_canonical,
    load_g1,
    parse_field_map,
    summarize,
    write_articles,
    write_events,
)

log = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DATA = 3
EXIT_CONTRACT = 4


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="newsrec",
        description="Streaming session-based news recommendation experiments",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="log at INFO level")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p_ingest = sub.add_parser("ingest", help="convert a portal dump to canonical files")
    p_ingest.add_argument(
        "--adapter", required=True, choices=["g1", "adressa", "canonical", "synthetic"]
    )
    p_ingest.add_argument("--source", help="clicks directory (g1/adressa) or events file (canonical)")
    p_ingest.add_argument("--articles", help="article metadata path (g1) or canonical articles file")
    p_ingest.add_argument("--map", dest="field_map", help="key=value adapter mapping file")
    p_ingest.add_argument("--out-dir", required=True, help="directory for canonical files")
    p_ingest.add_argument("--seed", type=int, default=0, help="synthetic corpus seed")
    p_ingest.add_argument("--topics", type=int, default=10, help="synthetic topic count")
    p_ingest.add_argument("--n-articles", type=int, default=2000)
    p_ingest.add_argument("--n-users", type=int, default=15000)
    p_ingest.add_argument("--days", type=int, default=16)
    p_ingest.set_defaults(handler=cmd_ingest)

    p_encode = sub.add_parser("encode", help="build article content embeddings")
    p_encode.add_argument("--articles", required=True, help="canonical articles file")
    p_encode.add_argument("--encoder", required=True, help="lsa | w2v_tfidf | doc2vec")
    p_encode.add_argument("--dim", type=int, default=250)
    p_encode.add_argument("--seed", type=int, default=1)
    p_encode.add_argument("--word-vectors", help="pretrained vectors (w2v_tfidf)")
    p_encode.add_argument("--epochs", type=int, default=10, help="doc2vec epochs")
    p_encode.add_argument("--negatives", type=int, default=5, help="doc2vec negatives")
    p_encode.add_argument("--out", required=True, help="embedding file to write")
    p_encode.set_defaults(handler=cmd_encode)

    p_run = sub.add_parser("run", help="execute the full evaluation protocol")
    p_run.add_argument("config", help="key=value run configuration file")
    p_run.set_defaults(handler=cmd_run)

    p_report = sub.add_parser("report", help="render a saved JSON aggregate")
    p_report.add_argument("aggregate", help="aggregate.json produced by `run`")
    p_report.add_argument("--significance", action="store_true", help="include the p-value table")
    p_report.set_defaults(handler=cmd_report)

    return parser


def cmd_ingest(args: argparse.Namespace) -> int:
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    out_events = out_dir / "events.csv"
    out_articles = out_dir / "articles.csv"

    if args.adapter == "synthetic":
        corpus = generate_synthetic(
            n_topics=args.topics,
            n_articles=args.n_articles,
            n_users=args.n_users,
            days=args.days,
            seed=args.seed,
        )
        write_events(out_events, corpus.events)
        write_articles(out_articles, corpus.articles)
        summary = summarize(corpus.events, len(corpus.articles))
    elif args.adapter == "canonical":
        if not args.source or not args.articles:
            raise ConfigError("canonical adapter needs --source and --articles")
        events, catalog, stats = load_canonical(args.source, args.articles)
        write_events(out_events, events)
        write_articles(out_articles, list(catalog))
        summary = summarize(events, len(catalog), stats.dropped_unresolved)
    else:
        if not args.source:
            raise ConfigError(f"{args.adapter} adapter needs --source")
        if not args.field_map:
            raise ConfigError(f"{args.adapter} adapter needs --map")
        mapping = parse_field_map(args.field_map)
        if args.adapter == "g1":
            if not args.articles:
                raise ConfigError("g1 adapter needs --articles metadata path")
            summary = load_g1(args.source, args.articles, mapping, out_events, out_articles)
        else:
            summary = load_adressa(args.source, mapping, out_events, out_articles)

    print(summary.format_table())
    print(f"wrote {out_events} and {out_articles}")
    return EXIT_OK


def cmd_encode(args: argparse.Namespace) -> int:
    if args.encoder == "none":
        raise ConfigError(
            "encoder 'none' writes nothing; the content-agnostic setting is the "
            "run-time flag nar.use_ace=false"
        )
    from .ingest import read_articles

    catalog = read_articles(args.articles)
    word_table = None
    if args.encoder == "w2v_tfidf":
        if not args.word_vectors:
            raise ConfigError("w2v_tfidf needs --word-vectors")
        word_table = load_word_vectors(args.word_vectors)
    store = encode_corpus(
        args.encoder,
        catalog,
        dim=args.dim,
        seed=args.seed,
        word_table=word_table,
        doc2vec_epochs=args.epochs,
        doc2vec_negatives=args.negatives,
    )
    manifest = {
        "encoder": args.encoder,
        "dim": store.dim,
        "seed": args.seed,
        "doc2vec_epochs": args.epochs,
        "doc2vec_negatives": args.negatives,
        "doc2vec_objective": "pv-dbow",
        "articles": args.articles,
        "n_embedded": len(store),
        "n_textless": len(store.textless),
    }
    store.save(args.out, manifest)
    print(f"wrote {len(store)} embeddings (dim {store.dim}) to {args.out}")
    return EXIT_OK


def cmd_run(args: argparse.Namespace) -> int:
    config = RunConfig.from_file(args.config)
    config.validate()
    report = driver.run(config)
    print(format_aggregate_table(report.aggregate, config.protocol_top_n))
    print(
        f"\n{report.n_samples} samples "
        f"({report.n_short_pool} short pools, {report.n_skipped_empty_pool} skipped); "
        f"reports in {config.output_dir}"
    )
    return EXIT_OK


def cmd_report(args: argparse.Namespace) -> int:
    path = Path(args.aggregate)
    if not path.exists():
        raise DataError(f"aggregate file not found: {path}")
    data = json.loads(path.read_text(encoding="utf-8"))
    print(format_aggregate_table(data["aggregate"]))
    print(f"\nsamples: {data['n_samples']}  short pools: {data['n_short_pool']}")
    if args.significance:
        print("\npaired t-tests (Bonferroni-adjusted):")
        for entry in data.get("significance", []):
            print(
                f"  {entry['metric']:>6}: {entry['recommender_a']} vs {entry['recommender_b']}"
                f"  t={entry['t']:+.3f}  p_adj={entry['p_adjusted']:.2e}"
            )
    return EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    if getattr(args, "handler", None) is None:
        parser.print_help()
        return EXIT_OK
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DataError as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except ContractViolation as exc:
        print(f"contract violation: {exc}", file=sys.stderr)
        return EXIT_CONTRACT


if __name__ == "__main__":
    raise SystemExit(main())
