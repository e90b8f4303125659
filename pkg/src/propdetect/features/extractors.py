"""Sentence-level feature extractors.

Each extractor is a pure function returning a :class:`FeatureVector` whose
names and order depend only on the extractor, never on the input.
"""
from __future__ import annotations

import logging
import math
import re
from dataclasses import dataclass

import numpy as np

from ..corpus import _is_punct
from .lexicons import EMOTIONS, Lexicons
from .tagging import COARSE_POS, NER_TAGS, coarse_pos, normalize_ner

logger = logging.getLogger(__name__)

POSITIONS = ("FIRST", "TOP", "MIDDLE", "BOTTOM", "LAST")
# upper bounds of the sentence-length bins; the last bin is open-ended
LENGTH_BINS = ((2, "len_le2"), (4, "len_3_4"), (8, "len_5_8"), (20, "len_9_20"),
               (40, "len_21_40"), (60, "len_41_60"), (None, "len_gt60"))

_VOWEL_GROUP = re.compile(r"[aeiouy]+")


@dataclass(frozen=True)
class FeatureVector:
    names: tuple[str, ...]
    values: np.ndarray
    schema_id: str

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise ValueError("duplicate feature names")
        if len(self.names) != len(self.values):
            raise ValueError("names and values differ in length")
        if not np.all(np.isfinite(self.values)):
            bad = [n for n, v in zip(self.names, self.values) if not math.isfinite(v)]
            raise ValueError(f"non-finite feature values: {bad}")

    def __len__(self):
        return len(self.names)

    def __getitem__(self, name):
        return float(self.values[self.names.index(name)])

    def as_dict(self):
        return dict(zip(self.names, self.values.tolist()))

    @classmethod
    def from_pairs(cls, pairs, schema_id):
        names = tuple(n for n, _ in pairs)
        return cls(names, np.array([float(v) for _, v in pairs], dtype=float), schema_id)

    @classmethod
    def concat(cls, vectors, schema_id):
        names = tuple(n for v in vectors for n in v.names)
        values = np.concatenate([v.values for v in vectors]) if vectors else np.zeros(0)
        return cls(names, values, schema_id)


def _ratio(n, d):
    return min(n / d, 1.0) if d else 0.0


def _words(sentence):
    return [t.text for t in sentence.tokens if any(c.isalnum() for c in t.text)]


def count_syllables(word):
    """Vowel groups, minus one for a silent trailing ``e``, at least one."""
    w = "".join(c for c in word.lower() if c.isalpha())
    n = len(_VOWEL_GROUP.findall(w))
    if w.endswith("e"):
        n -= 1
    return max(n, 1)


def char_features(sentence):
    toks = [t.text for t in sentence.tokens]
    n = len(toks)
    q = sentence.text.count("?")
    e = sentence.text.count("!")
    first = sum(1 for t in toks if t[:1].isupper())
    allcap = sum(1 for t in toks if len(t) >= 2 and t.isupper())
    return FeatureVector.from_pairs([
        ("question_count", q), ("exclamation_count", e),
        ("n_first_cap", first), ("n_all_cap", allcap),
        ("question_ratio", _ratio(q, n)), ("exclamation_ratio", _ratio(e, n)),
        ("first_cap_ratio", _ratio(first, n)), ("all_cap_ratio", _ratio(allcap, n)),
    ], "char")


def readability_scores(n_words, n_syllables, n_sentences=1):
    """Flesch reading ease and Flesch-Kincaid grade from raw counts."""
    if n_words == 0:
        return 0.0, 0.0
    wps = n_words / n_sentences
    spw = n_syllables / n_words
    return 206.835 - 1.015 * wps - 84.6 * spw, 0.39 * wps + 11.8 * spw - 15.59


def readability_features(sentence):
    words = _words(sentence)
    syl = [count_syllables(w) for w in words]
    ease, grade = readability_scores(len(words), sum(syl))
    n = len(words)
    return FeatureVector.from_pairs([
        ("flesch_reading_ease", ease), ("flesch_kincaid_grade", grade),
        ("word_count", n),
        ("mean_word_length", sum(len(w) for w in words) / n if n else 0.0),
        ("fraction_polysyllabic", _ratio(sum(1 for s in syl if s >= 3), n)),
    ], "readability")


def sentiment_features(sentence, lexicons: Lexicons):
    n = len(sentence.tokens)
    pos, neg = [], []
    for t in sentence.tokens:
        s = lexicons.sentiment.get(t.text.lower())
        if s is None:
            continue
        (pos if s > 0 else neg).append(s)
    sum_pos, sum_neg = sum(pos), sum(-s for s in neg)
    matched = len(pos) + len(neg)
    return FeatureVector.from_pairs([
        ("sum_pos", sum_pos), ("sum_neg", sum_neg),
        ("compound", (sum_pos - sum_neg) / (1 + n)),
        ("max_pos", max(pos, default=0.0)), ("max_neg", max((-s for s in neg), default=0.0)),
        ("n_matched", matched),
        # stand-in for a subjectivity model: share of opinion-bearing tokens
        ("subjectivity", _ratio(matched, n)),
    ], "sentiment")


def emotion_features(sentence, lexicons: Lexicons):
    n = len(sentence.tokens)
    counts = dict.fromkeys(EMOTIONS, 0)
    for t in sentence.tokens:
        for emo in lexicons.emotion.get(t.text.lower(), ()):
            counts[emo] += 1
    pairs = [(f"{e}_count", counts[e]) for e in EMOTIONS]
    pairs += [(f"{e}_ratio", _ratio(counts[e], n)) for e in EMOTIONS]
    return FeatureVector.from_pairs(pairs, "emotion")


def loaded_matches(sentence, lexicons: Lexicons):
    """Token ranges ``(i, j)`` of every loaded-phrase occurrence."""
    words = [t.text.lower() for t in sentence.tokens]
    hits = []
    for phrase in sorted(lexicons.loaded):
        m = len(phrase)
        for i in range(len(words) - m + 1):
            if tuple(words[i:i + m]) == phrase:
                hits.append((i, i + m))
    return hits


def loaded_word_features(sentence, lexicons: Lexicons):
    n = len(loaded_matches(sentence, lexicons))
    return FeatureVector.from_pairs([("loaded_count", n), ("loaded_present", int(n > 0))], "loaded")


def multi_meaning_features(sentence, lexicons: Lexicons):
    total = sum(lexicons.senses.get((t.text.lower(), coarse_pos(t.pos)), 0) for t in sentence.tokens)
    n = len(sentence.tokens)
    return FeatureVector.from_pairs([("sense_sum", total), ("sense_mean", total / n if n else 0.0)],
                                    "multi_meaning")


def pos_ner_features(sentence):
    pos = dict.fromkeys(COARSE_POS, 0)
    ner = dict.fromkeys(NER_TAGS, 0)
    annotated = False
    for t in sentence.tokens:
        if t.pos is not None:
            annotated = True
            pos[coarse_pos(t.pos)] += 1
        tag = normalize_ner(t.ner)
        if tag:
            ner[tag] += 1
    if sentence.tokens and not annotated:
        logger.warning("sentence %s/%d has no POS annotations; POS/NER features are zero",
                       sentence.article_id, sentence.index)
    pairs = [(f"pos_{p}", pos[p]) for p in COARSE_POS]
    pairs += [(f"ner_{e}", ner[e]) for e in NER_TAGS]
    pairs.append(("entity_total", sum(ner.values())))
    return FeatureVector.from_pairs(pairs, "pos_ner")


def position_category(rank, total):
    if rank == 1:
        return "FIRST"
    if rank == total:
        return "LAST"
    frac = rank / total
    if frac < 0.3:
        return "TOP"
    if frac <= 0.7:
        return "MIDDLE"
    return "BOTTOM"


def length_bin(n_tokens):
    for upper, name in LENGTH_BINS:
        if upper is None or n_tokens <= upper:
            return name


def layout_features(sentence, document):
    retained = [s.index for s in document.retained_sentences]
    rank = retained.index(sentence.index) + 1
    cat = position_category(rank, len(retained))
    lb = length_bin(len(sentence.tokens))
    pairs = [(f"position_{p}", int(p == cat)) for p in POSITIONS]
    pairs += [(name, int(name == lb)) for _, name in LENGTH_BINS]
    return FeatureVector.from_pairs(pairs, "layout")


def linguistic_features(sentence, lexicons):
    return FeatureVector.concat([
        char_features(sentence),
        readability_features(sentence),
        sentiment_features(sentence, lexicons),
        emotion_features(sentence, lexicons),
        loaded_word_features(sentence, lexicons),
        multi_meaning_features(sentence, lexicons),
        pos_ner_features(sentence),
    ], "linguistic")


def is_punct_token(text):
    return bool(text) and all(_is_punct(c) for c in text)
