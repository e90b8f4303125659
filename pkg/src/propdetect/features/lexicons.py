from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

from ..corpus import tokenize
from ..errors import DataFormatError
from .tagging import coarse_pos

EMOTIONS = ("sadness", "joy", "fear", "disgust", "anger")


@dataclass
class Lexicons:
    """Word lists backing the lexical feature extractors.

    ``loaded`` holds phrases as tuples of lowercased tokens; ``senses`` is
    keyed by ``(lemma, coarse POS)``.
    """
    sentiment: dict[str, float] = field(default_factory=dict)
    emotion: dict[str, frozenset] = field(default_factory=dict)
    loaded: set[tuple[str, ...]] = field(default_factory=set)
    senses: dict[tuple[str, str], int] = field(default_factory=dict)

    def __post_init__(self):
        self.loaded = {_phrase_key(p) if isinstance(p, str) else tuple(p) for p in self.loaded}
        self.emotion = {k.lower(): frozenset(v) for k, v in self.emotion.items()}
        self.sentiment = {k.lower(): float(v) for k, v in self.sentiment.items()}
        for k, v in self.sentiment.items():
            if not math.isfinite(v):
                raise ValueError(f"non-finite sentiment score for {k!r}")
        self.senses = {(lemma.lower(), coarse_pos(pos)): int(n) for (lemma, pos), n in self.senses.items()}
        if any(n < 0 for n in self.senses.values()):
            raise ValueError("sense counts must be non-negative")

    @property
    def max_phrase_len(self):
        return max((len(p) for p in self.loaded), default=0)


def _phrase_key(phrase):
    return tuple(t.text.lower() for t in tokenize(phrase))


def _lines(path):
    path = Path(path)
    for lineno, line in enumerate(path.read_text(encoding="utf-8").split("\n"), start=1):
        line = line.rstrip("\r")
        if line.strip() and not line.startswith("#"):
            yield path, lineno, line


def load_sentiment(path):
    out = {}
    for p, n, line in _lines(path):
        cols = line.split("\t")
        if len(cols) != 2:
            raise DataFormatError("expected token<TAB>score", p, n)
        try:
            score = float(cols[1])
        except ValueError:
            raise DataFormatError(f"bad score {cols[1]!r}", p, n) from None
        if not math.isfinite(score) or abs(score) > 1:
            raise DataFormatError(f"score {score} outside [-1, 1]", p, n)
        out[cols[0].lower()] = score
    return out


def load_emotion(path):
    """NRC-style ``token<TAB>emotion<TAB>0|1``; emotions outside the five are ignored."""
    out = {}
    for p, n, line in _lines(path):
        cols = line.split("\t")
        if len(cols) != 3 or cols[2] not in ("0", "1"):
            raise DataFormatError("expected token<TAB>emotion<TAB>0|1", p, n)
        word, emo = cols[0].lower(), cols[1].lower()
        if cols[2] == "1" and emo in EMOTIONS:
            out.setdefault(word, set()).add(emo)
    return {k: frozenset(v) for k, v in out.items()}


def load_loaded(path):
    return {_phrase_key(line.strip()) for _, _, line in _lines(path) if _phrase_key(line.strip())}


def load_senses(path):
    out = {}
    for p, n, line in _lines(path):
        cols = line.split("\t")
        if len(cols) != 3:
            raise DataFormatError("expected lemma<TAB>pos<TAB>count", p, n)
        try:
            count = int(cols[2])
        except ValueError:
            raise DataFormatError(f"bad count {cols[2]!r}", p, n) from None
        if count < 0:
            raise DataFormatError("negative sense count", p, n)
        key = (cols[0].lower(), coarse_pos(cols[1]))
        out[key] = out.get(key, 0) + count
    return out


def load_lexicons(sentiment=None, emotion=None, loaded=None, senses=None):
    """Load whichever lexicon files are given; missing ones stay empty."""
    return Lexicons(
        sentiment=load_sentiment(sentiment) if sentiment else {},
        emotion=load_emotion(emotion) if emotion else {},
        loaded=load_loaded(loaded) if loaded else set(),
        senses=load_senses(senses) if senses else {},
    )
