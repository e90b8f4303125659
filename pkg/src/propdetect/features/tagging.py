"""POS / NER annotations: sidecar files, tag coarsening and a naive fallback tagger."""
from __future__ import annotations

import logging
from pathlib import Path

from ..corpus import _is_punct
from ..errors import DataFormatError

logger = logging.getLogger(__name__)

COARSE_POS = ("ADJ", "ADP", "ADV", "CONJ", "DET", "NOUN", "NUM", "PRON",
              "PROPN", "PRT", "PUNCT", "VERB", "X")
NER_TAGS = ("PERSON", "NORP", "FAC", "ORG", "GPE", "LOC", "EVENT",
            "WORK_OF_ART", "LAW", "LANGUAGE")

_PENN = {
    "NNP": "PROPN", "NNPS": "PROPN", "NN": "NOUN", "NNS": "NOUN",
    "VB": "VERB", "VBD": "VERB", "VBG": "VERB", "VBN": "VERB", "VBP": "VERB", "VBZ": "VERB", "MD": "VERB",
    "JJ": "ADJ", "JJR": "ADJ", "JJS": "ADJ",
    "RB": "ADV", "RBR": "ADV", "RBS": "ADV", "WRB": "ADV",
    "PRP": "PRON", "PRP$": "PRON", "WP": "PRON", "WP$": "PRON", "EX": "PRON",
    "DT": "DET", "PDT": "DET", "WDT": "DET",
    "IN": "ADP", "CD": "NUM", "CC": "CONJ",
    "RP": "PRT", "TO": "PRT", "POS": "PRT",
}
# WordNet-style single-letter parts of speech
_WORDNET = {"n": "NOUN", "v": "VERB", "a": "ADJ", "s": "ADJ", "r": "ADV"}
_ALIASES = {".": "PUNCT", "SCONJ": "CONJ", "CCONJ": "CONJ", "PART": "PRT",
            "AUX": "VERB", "INTJ": "X", "SYM": "X"}


def coarse_pos(tag):
    """Map Penn, universal or WordNet tags onto :data:`COARSE_POS`."""
    if not tag:
        return "X"
    if tag in COARSE_POS:
        return tag
    if tag in _ALIASES:
        return _ALIASES[tag]
    if tag in _PENN:
        return _PENN[tag]
    if tag in _WORDNET:
        return _WORDNET[tag]
    if all(_is_punct(c) for c in tag):
        return "PUNCT"
    return "X"


def normalize_ner(tag):
    """Strip IOB prefixes and keep only the selected entity types."""
    if not tag:
        return ""
    if len(tag) > 2 and tag[1] == "-" and tag[0] in "BIES":
        tag = tag[2:]
    return tag if tag in NER_TAGS else ""


def load_annotations(path, documents):
    """Attach POS and NER from a sidecar TSV to the tokens of ``documents``.

    Row layout: ``article_id, sentence_index, token_index, token, POS, NER``
    with a 0-based token index and an empty NER field for no entity.
    """
    path = Path(path)
    text = path.read_text(encoding="utf-8")
    n = 0
    for lineno, line in enumerate(text.split("\n"), start=1):
        if not line.strip():
            continue
        cols = line.rstrip("\r").split("\t")
        if len(cols) == 5:
            cols.append("")
        if len(cols) != 6:
            raise DataFormatError(f"expected 6 tab-separated fields, got {len(cols)}", path, lineno)
        aid, sidx, tidx, tok, pos, ner = cols
        try:
            sent = documents[aid].sentence(int(sidx))
            token = sent.tokens[int(tidx)]
        except (KeyError, IndexError, ValueError):
            raise DataFormatError(f"no token ({aid}, {sidx}, {tidx})", path, lineno) from None
        if token.text != tok:
            raise DataFormatError(f"token mismatch: file has {tok!r}, text has {token.text!r}", path, lineno)
        token.pos = pos
        token.ner = ner
        n += 1
    return n


def fallback_tag(sentence):
    """Fill in missing POS/NER with a deliberately naive rule set.

    Capitalized non-initial words become PROPN/PERSON, digit strings NUM,
    punctuation PUNCT, everything else NOUN with no entity.
    """
    for k, tok in enumerate(sentence.tokens):
        if tok.pos is not None:
            continue
        t = tok.text
        if all(_is_punct(c) for c in t):
            tok.pos, tok.ner = "PUNCT", ""
        elif any(c.isdigit() for c in t) and not any(c.isalpha() for c in t):
            tok.pos, tok.ner = "NUM", ""
        elif k > 0 and t[:1].isupper():
            tok.pos, tok.ner = "PROPN", "PERSON"
        else:
            tok.pos, tok.ner = "NOUN", ""


def tag_documents(documents):
    for doc in documents.values():
        for sent in doc.sentences:
            fallback_tag(sent)
