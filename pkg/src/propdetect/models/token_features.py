from __future__ import annotations

from ..features.extractors import is_punct_token, loaded_matches
from ..features.lexicons import Lexicons
from ..features.tagging import coarse_pos, normalize_ner

TOKEN_FEATURE_GROUPS = ("word", "pos", "ner", "polarity", "shape", "punct", "loaded")


def shape(text):
    if len(text) >= 2 and text.isupper():
        return "all-cap"
    if text[:1].isupper():
        return "first-cap"
    if text.islower():
        return "lower"
    return "other"


def polarity_bucket(text, lexicons):
    s = lexicons.sentiment.get(text.lower(), 0.0)
    if s > 0:
        return "positive"
    if s < 0:
        return "negative"
    return "neutral"


def sentence_token_features(sentence, lexicons=None, groups=TOKEN_FEATURE_GROUPS):
    """Feature-name lists for every token of ``sentence``, in a fixed order."""
    lexicons = lexicons or Lexicons()
    in_loaded = [False] * len(sentence.tokens)
    if "loaded" in groups:
        for i, j in loaded_matches(sentence, lexicons):
            for k in range(i, j):
                in_loaded[k] = True
    out = []
    for k, tok in enumerate(sentence.tokens):
        feats = ["bias"]
        if "word" in groups:
            feats.append(f"w={tok.text.lower()}")
        if "pos" in groups:
            feats.append(f"pos={coarse_pos(tok.pos)}")
        if "ner" in groups:
            feats.append(f"ner={normalize_ner(tok.ner)}")
        if "polarity" in groups:
            feats.append(f"polarity={polarity_bucket(tok.text, lexicons)}")
        if "shape" in groups:
            feats.append(f"shape={shape(tok.text)}")
        if "punct" in groups:
            feats.append(f"punct={int(is_punct_token(tok.text))}")
        if "loaded" in groups:
            feats.append(f"loaded={int(in_loaded[k])}")
        out.append(feats)
    return out


def token_features(token, sentence, lexicons=None, groups=TOKEN_FEATURE_GROUPS):
    k = next(i for i, t in enumerate(sentence.tokens) if t is token or t.char_span == token.char_span)
    return sentence_token_features(sentence, lexicons, groups)[k]
