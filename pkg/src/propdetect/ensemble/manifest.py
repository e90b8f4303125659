"""Ensemble manifests and validated prediction stores.

A manifest is a flat text file of ``key = value`` lines plus one
``source = ...`` line per prediction file::

    task = slc
    mode = relax
    relax_fraction = 0.3
    tau = 0.35
    # source = model_id fold dev_f1 path [tau]
    source = cnn 1 0.61 preds/cnn_fold1.tsv
    source = bert 1 0.66 preds/bert_fold1.tsv 0.35

Relative paths resolve against the manifest's directory.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

from ..corpus import load_flc_labels
from ..errors import CoverageError, DataFormatError
from ..models.predictions import read_predictions
from .voting import EnsembleConfig, column_id


@dataclass
class Source:
    model_id: str
    fold: int
    dev_f1: float
    path: Path
    tau: float | None = None

    @property
    def column(self):
        return column_id(self.model_id, self.fold)


@dataclass
class Manifest:
    task: str = "slc"
    mode: str = "relax"
    relax_fraction: float = 0.3
    tau: float = 0.5
    sources: list[Source] = field(default_factory=list)

    def ensemble_config(self, extra_f1=None):
        f1 = {s.column: s.dev_f1 for s in self.sources}
        f1.update(extra_f1 or {})
        return EnsembleConfig(self.mode, self.relax_fraction, f1)


def read_manifest(path):
    path = Path(path)
    m = Manifest()
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as e:
        raise DataFormatError(f"cannot read manifest: {e}", path) from None
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise DataFormatError("expected key = value", path, lineno)
        key, value = (x.strip() for x in line.split("=", 1))
        try:
            if key == "source":
                parts = value.split()
                if len(parts) not in (4, 5):
                    raise ValueError("source needs: model_id fold dev_f1 path [tau]")
                p = Path(parts[3])
                m.sources.append(Source(parts[0], int(parts[1]), float(parts[2]),
                                        p if p.is_absolute() else path.parent / p,
                                        float(parts[4]) if len(parts) == 5 else None))
            elif key == "task":
                if value not in ("slc", "flc"):
                    raise ValueError(f"unknown task {value!r}")
                m.task = value
            elif key == "mode":
                m.mode = value
            elif key == "relax_fraction":
                m.relax_fraction = float(value)
            elif key == "tau":
                m.tau = float(value)
            else:
                raise ValueError(f"unknown key {key!r}")
        except ValueError as e:
            raise DataFormatError(str(e), path, lineno) from None
    seen = set()
    for s in m.sources:
        if s.column in seen:
            raise DataFormatError(f"source {s.column} listed twice", path)
        seen.add(s.column)
    return m


def ingest_predictions(manifest, documents=None):
    """Load and validate every SLC source listed in ``manifest``.

    Returns ``{column_id: {sentence_key: probability}}``.  All columns must
    cover the same sentences, and every retained sentence of ``documents``
    when those are given.
    """
    if isinstance(manifest, (str, Path)):
        manifest = read_manifest(manifest)
    store = {}
    for src in manifest.sources:
        preds = read_predictions(src.path, model_id=src.model_id)
        col = {}
        for p in preds:
            if p.key in col:
                raise DataFormatError(f"duplicate prediction for {p.key}", src.path)
            col[p.key] = p.probability
        store[src.column] = col
    required = None
    if documents is not None:
        required = {s.key for d in documents.values() for s in d.retained_sentences}
    elif store:
        required = set().union(*(c.keys() for c in store.values()))
    for cid, col in store.items():
        gaps = required - col.keys()
        if gaps:
            raise CoverageError(f"{cid} lacks predictions for {len(gaps)} sentence(s), e.g. {sorted(gaps)[:3]}")
    return store


def ingest_fragments(manifest, documents=None):
    """``{column_id: [Fragment, ...]}`` for every FLC source of ``manifest``."""
    if isinstance(manifest, (str, Path)):
        manifest = read_manifest(manifest)
    out = {}
    for src in manifest.sources:
        out[src.column] = [f for f, _ in load_flc_labels(src.path, documents, with_model_id=True)]
    return out


def threshold_column(column, tau):
    return {k: p >= tau for k, p in column.items()}
