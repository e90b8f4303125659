"""Sentence-level prediction records and their TSV form."""
from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

from ..errors import DataFormatError
from ..utils import fmt_float


@dataclass(frozen=True)
class SentencePrediction:
    article_id: str
    sentence_index: int
    probability: float
    model_id: str

    def __post_init__(self):
        if not (0.0 <= self.probability <= 1.0):
            raise ValueError(f"probability {self.probability} outside [0, 1]")

    @property
    def key(self):
        return (self.article_id, self.sentence_index)


def write_predictions(path, predictions):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for p in sorted(predictions, key=lambda p: (p.article_id, p.sentence_index, p.model_id)):
            fh.write(f"{p.article_id}\t{p.sentence_index}\t{fmt_float(p.probability)}\t{p.model_id}\n")


def read_predictions(path, model_id=None):
    """Parse ``article_id, sentence_index, probability, model_id`` rows.

    Rejects malformed rows, probabilities outside ``[0, 1]`` and repeated
    ``(model, sentence)`` pairs, naming the offending line.
    """
    path = Path(path)
    out = []
    seen = set()
    text = path.read_text(encoding="utf-8")
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        cols = line.rstrip("\r").split("\t")
        if len(cols) not in (3, 4):
            raise DataFormatError(f"expected 4 tab-separated fields, got {len(cols)}", path, lineno)
        try:
            idx, prob = int(cols[1]), float(cols[2])
        except ValueError:
            raise DataFormatError("bad sentence index or probability", path, lineno) from None
        if not math.isfinite(prob) or not 0.0 <= prob <= 1.0:
            raise DataFormatError(f"probability {cols[2]} outside [0, 1]", path, lineno)
        mid = cols[3] if len(cols) == 4 else (model_id or "")
        key = (mid, cols[0], idx)
        if key in seen:
            raise DataFormatError(f"duplicate prediction for model {mid!r}, sentence ({cols[0]}, {idx})",
                                  path, lineno)
        seen.add(key)
        out.append(SentencePrediction(cols[0], idx, prob, mid))
    return out
