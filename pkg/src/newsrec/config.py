"""Run configuration: flat key=value text with dotted section prefixes.

The format doubles as the run-manifest format, so configs and manifests
diff cleanly. Unknown keys are rejected; every referenced input path must
exist at validation time.
"""

from __future__ import annotations

from dataclasses import dataclass, fields
from pathlib import Path
from typing import ClassVar

from .errors import ConfigError

VALID_RECOMMENDERS = ("co", "sr", "itemknn", "rp", "cb", "nar", "nar_noace", "random", "oracle")
VALID_ENCODERS = ("none", "lsa", "w2v_tfidf", "doc2vec")


@dataclass
class RunConfig:
    dataset_events: str = ""
    dataset_articles: str = ""
    encoder_name: str = "none"
    encoder_dim: int = 250
    encoder_seed: int = 1
    encoder_word_vectors: str = ""
    encoder_doc2vec_epochs: int = 10
    encoder_doc2vec_negatives: int = 5
    embeddings_path: str = ""
    recommenders: tuple[str, ...] = ()
    protocol_warmup_hours: int = 48
    protocol_eval_every: int = 5
    protocol_n_eval_negatives: int = 50
    protocol_top_n: int = 10
    protocol_seed: int = 7
    nar_use_ace: bool = True
    nar_hidden: int = 64
    nar_scorer_hidden: int = 128
    nar_batch: int = 64
    nar_train_negatives: int = 10
    nar_lr: float = 1e-3
    nar_seed: int = 13
    nar_category_dim: int = 8
    nar_context_dim: int = 4
    nar_author_dim: int = 8
    output_dir: str = "runs/out"

    _KEYS: ClassVar[dict[str, str] | None] = None

    @classmethod
    def key_map(cls) -> dict[str, str]:
        """config key (dotted) -> attribute name."""
        if cls._KEYS is None:
            mapping = {}
            for f in fields(cls):
                if f.name == "recommenders":
                    mapping["recommenders"] = f.name
                else:
                    section, _, rest = f.name.partition("_")
                    mapping[f"{section}.{rest}"] = f.name
            cls._KEYS = mapping
        return cls._KEYS

    # --- parsing ------------------------------------------------------------

    @classmethod
    def from_text(cls, text: str, source: str = "<config>") -> "RunConfig":
        cfg = cls()
        key_map = cls.key_map()
        for lineno, raw in enumerate(text.splitlines(), start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            key, sep, value = line.partition("=")
            if not sep:
                raise ConfigError(f"{source}:{lineno}: expected key=value, got {raw!r}")
            key = key.strip()
            value = value.strip()
            attr = key_map.get(key)
            if attr is None:
                raise ConfigError(f"{source}:{lineno}: unknown config key {key!r}")
            current = getattr(cfg, attr)
            try:
                if attr == "recommenders":
                    parsed: object = tuple(v.strip() for v in value.split(",") if v.strip())
                elif isinstance(current, bool):
                    if value.lower() not in ("true", "false"):
                        raise ValueError(f"expected true/false, got {value!r}")
                    parsed = value.lower() == "true"
                elif isinstance(current, int):
                    parsed = int(value)
                elif isinstance(current, float):
                    parsed = float(value)
                else:
                    parsed = value
            except ValueError as exc:
                raise ConfigError(f"{source}:{lineno}: bad value for {key}: {exc}") from exc
            setattr(cfg, attr, parsed)
        return cfg

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise ConfigError(f"config file not found: {path}")
        return cls.from_text(path.read_text(encoding="utf-8"), source=str(path))

    def to_text(self) -> str:
        lines = []
        for key, attr in sorted(self.key_map().items()):
            value = getattr(self, attr)
            if attr == "recommenders":
                value = ",".join(value)
            elif isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key}={value}")
        return "\n".join(lines) + "\n"

    # --- validation ---------------------------------------------------------

    def validate(self) -> None:
        def require_path(key: str, value: str) -> None:
            if not value:
                raise ConfigError(f"{key} is required")
            if not Path(value).exists():
                raise ConfigError(f"{key}: path does not exist: {value}")

        require_path("dataset.events", self.dataset_events)
        require_path("dataset.articles", self.dataset_articles)
        if self.encoder_name not in VALID_ENCODERS:
            raise ConfigError(
                f"encoder.name must be one of {VALID_ENCODERS}, got {self.encoder_name!r}"
            )
        if self.encoder_name == "w2v_tfidf":
            require_path("encoder.word_vectors", self.encoder_word_vectors)
        if self.embeddings_path:
            require_path("embeddings.path", self.embeddings_path)
        if not self.recommenders:
            raise ConfigError("recommenders must name at least one recommender")
        for name in self.recommenders:
            if name not in VALID_RECOMMENDERS:
                raise ConfigError(
                    f"unknown recommender {name!r}; expected one of {VALID_RECOMMENDERS}"
                )
        if len(set(self.recommenders)) != len(self.recommenders):
            raise ConfigError("recommenders contains duplicates")

        has_embeddings = self.embeddings_path or self.encoder_name != "none"
        if "cb" in self.recommenders and not has_embeddings:
            raise ConfigError("cb needs content embeddings (encoder.name or embeddings.path)")
        if "nar" in self.recommenders and self.nar_use_ace and not has_embeddings:
            raise ConfigError(
                "nar with nar.use_ace=true needs content embeddings; "
                "set nar.use_ace=false for the content-agnostic configuration"
            )
        if "nar" in self.recommenders and "nar_noace" in self.recommenders and not self.nar_use_ace:
            raise ConfigError("nar with use_ace=false duplicates nar_noace")

        positive = {
            "encoder.dim": self.encoder_dim,
            "protocol.eval_every": self.protocol_eval_every,
            "protocol.n_eval_negatives": self.protocol_n_eval_negatives,
            "protocol.top_n": self.protocol_top_n,
            "nar.hidden": self.nar_hidden,
            "nar.scorer_hidden": self.nar_scorer_hidden,
            "nar.batch": self.nar_batch,
            "nar.train_negatives": self.nar_train_negatives,
            "nar.category_dim": self.nar_category_dim,
            "nar.context_dim": self.nar_context_dim,
        }
        for key, value in positive.items():
            if value < 1:
                raise ConfigError(f"{key} must be >= 1, got {value}")
        if self.protocol_warmup_hours < 0:
            raise ConfigError("protocol.warmup_hours must be >= 0")
        if self.nar_lr <= 0:
            raise ConfigError("nar.lr must be > 0")
        if self.nar_author_dim < 0:
            raise ConfigError("nar.author_dim must be >= 0")
        if not self.output_dir:
            raise ConfigError("output.dir is required")
