"""Flat ``key = value`` pipeline configuration."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field, fields
from pathlib import Path

from .errors import DataFormatError
from .features.assemble import FEATURE_GROUPS
from .models.threshold import TAU_GRID
from .models.token_features import TOKEN_FEATURE_GROUPS

PATH_KEYS = ("corpus_dir", "slc_labels", "flc_labels", "eval_dir", "eval_slc_labels",
             "eval_flc_labels", "sentiment_lexicon", "emotion_lexicon", "loaded_lexicon",
             "sense_lexicon", "embeddings", "annotations", "eval_annotations", "manifest")

DEFAULT_FLC_VARIANTS = (
    ("lex", ("word", "shape", "punct", "loaded")),
    ("ling", TOKEN_FEATURE_GROUPS),
)


@dataclass
class PipelineConfig:
    corpus_dir: Path | None = None
    slc_labels: Path | None = None
    flc_labels: Path | None = None
    eval_dir: Path | None = None
    eval_slc_labels: Path | None = None
    eval_flc_labels: Path | None = None
    sentiment_lexicon: Path | None = None
    emotion_lexicon: Path | None = None
    loaded_lexicon: Path | None = None
    sense_lexicon: Path | None = None
    embeddings: Path | None = None
    annotations: Path | None = None
    eval_annotations: Path | None = None
    manifest: Path | None = None
    fallback_tagger: bool = True
    features: tuple[str, ...] = FEATURE_GROUPS
    tau_grid: tuple[float, ...] = TAU_GRID
    ensemble_mode: str = "relax"
    relax_fraction: float = 0.3
    postprocess: bool = False
    window: int = 10
    lambda_: float = 0.99
    slc_folds: int = 5
    flc_folds: int = 3
    seed: int = 0
    lda_topics: int = 10
    lda_iterations: int = 500
    lda_infer_iterations: int = 50
    logreg_l2: float = 1e-3
    logreg_epochs: int = 300
    logreg_learning_rate: float = 1.0
    crf_l2: float = 0.1
    crf_epochs: int = 100
    crf_learning_rate: float = 0.05
    flc_variants: tuple = field(default=DEFAULT_FLC_VARIANTS)

    def validate(self, require=()):
        for key in require:
            if getattr(self, key) is None:
                raise DataFormatError(f"configuration is missing {key}")
        for key in PATH_KEYS:
            p = getattr(self, key)
            if p is not None and not Path(p).exists():
                raise DataFormatError(f"{key}: path does not exist: {p}")
        if self.slc_folds < 2 or self.flc_folds < 2:
            raise DataFormatError("fold counts must be >= 2")
        if not all(0 < t < 1 for t in self.tau_grid):
            raise DataFormatError("every tau must lie in (0, 1)")
        if self.ensemble_mode not in ("majority", "relax"):
            raise DataFormatError(f"unknown ensemble mode {self.ensemble_mode!r}")
        unknown = set(self.features) - set(FEATURE_GROUPS)
        if unknown:
            raise DataFormatError(f"unknown feature groups {sorted(unknown)}")
        return self

    # -- (de)serialization -------------------------------------------------

    def to_text(self):
        lines = []
        for f in fields(self):
            lines.append(f"{_key(f.name)} = {_format(getattr(self, f.name))}")
        return "\n".join(lines) + "\n"

    def updated(self, **overrides):
        cfg = self
        for k, v in overrides.items():
            if v is not None:
                cfg = dataclasses.replace(cfg, **{_attr(k): _parse(_attr(k), v) if isinstance(v, str) else v})
        return cfg


def _key(name):
    return "lambda" if name == "lambda_" else name


def _attr(key):
    key = key.replace("-", "_")
    return "lambda_" if key == "lambda" else key


def _format(v):
    if v is None:
        return ""
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, tuple) and v and isinstance(v[0], tuple):
        return ",".join(f"{n}:{'+'.join(g)}" for n, g in v)
    if isinstance(v, tuple):
        return ",".join(str(x) for x in v)
    return str(v)


_FIELD_TYPES = {f.name: f for f in fields(PipelineConfig)}


def _parse(attr, raw):
    if attr not in _FIELD_TYPES:
        raise DataFormatError(f"unknown configuration key {_key(attr)!r}")
    raw = raw.strip()
    default = _FIELD_TYPES[attr].default
    if attr in PATH_KEYS:
        return Path(raw) if raw else None
    if attr == "flc_variants":
        out = []
        for item in raw.split(","):
            name, _, groups = item.strip().partition(":")
            gs = tuple(g for g in groups.split("+") if g)
            bad = set(gs) - set(TOKEN_FEATURE_GROUPS)
            if not name or not gs or bad:
                raise DataFormatError(f"bad flc variant {item!r}")
            out.append((name, gs))
        return tuple(out)
    if attr == "features":
        return tuple(x.strip() for x in raw.split(",") if x.strip())
    if attr == "tau_grid":
        return tuple(float(x) for x in raw.split(",") if x.strip())
    if isinstance(default, bool):
        if raw.lower() not in ("true", "false", "1", "0", "yes", "no"):
            raise DataFormatError(f"{_key(attr)}: expected a boolean, got {raw!r}")
        return raw.lower() in ("true", "1", "yes")
    try:
        if isinstance(default, int):
            return int(raw)
        if isinstance(default, float):
            return float(raw)
    except ValueError:
        raise DataFormatError(f"{_key(attr)}: bad value {raw!r}") from None
    return raw


def read_config(path):
    """Parse a config file; relative paths resolve against its directory."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DataFormatError(f"cannot read config: {e}", path) from None
    values = {}
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataFormatError("expected key = value", path, lineno)
        key, value = (x.strip() for x in line.split("=", 1))
        try:
            v = _parse(_attr(key), value)
        except DataFormatError as e:
            raise DataFormatError(str(e), path, lineno) from None
        if isinstance(v, Path) and not v.is_absolute():
            v = path.parent / v
        values[_attr(key)] = v
    return PipelineConfig(**values)
