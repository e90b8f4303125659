"""Seeded synthetic corpora with planted propaganda signals.

Propaganda sentences carry a run of all-caps words (gold technique
``Slogans``) and/or a word from the loaded-language list (gold technique
``Loaded_Language``).  Every other sentence is built from plain lowercase
vocabulary, so both tasks are learnable from the lexical features.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np

from .corpus import write_fragments, write_slc_labels
from .models.predictions import SentencePrediction, write_predictions
from .utils import fmt_float, substream

TOPIC_WORDS = (
    "economy market taxes budget trade jobs growth prices wages inflation banks".split(),
    "border security police crime courts prison judges policy agency officers".split(),
    "election voters ballots campaign senate congress parties debate polls district".split(),
)
FILLER = "the a of in on for with about that this from after before their its".split()
VERBS = "reported announced discussed reviewed described claimed approved signed planned noted".split()
NAMES = "Smith Jones Miller Brown Garcia Wilson Taylor Clark".split()
LOADED = "traitor disgrace corrupt thugs hoax evil treason scum".split()
SLOGAN_WORDS = "BUILD THE WALL STOP STEAL DRAIN SWAMP LOCK HER MAKE GREAT AGAIN".split()
POSITIVE = "great wonderful strong".split()


def _vocab():
    words = set(FILLER) | set(VERBS) | set(LOADED) | set(POSITIVE)
    for t in TOPIC_WORDS:
        words |= set(t)
    words |= {w.lower() for w in NAMES} | {w.lower() for w in SLOGAN_WORDS}
    return sorted(words)


def _plain_words(rng, topic, n):
    out = []
    for _ in range(n):
        r = rng.random()
        if r < 0.45:
            out.append(str(rng.choice(TOPIC_WORDS[topic])))
        elif r < 0.75:
            out.append(str(rng.choice(FILLER)))
        elif r < 0.9:
            out.append(str(rng.choice(VERBS)))
        elif r < 0.95:
            out.append(str(rng.choice(POSITIVE)))
        else:
            out.append(str(rng.choice(NAMES)))
    return out


def _sentence(rng, topic, propaganda):
    """Return ``(words, spans)`` with spans as ``(first_word, last_word_excl, technique)``."""
    words = _plain_words(rng, topic, int(rng.integers(6, 12)))
    spans = []
    if propaganda:
        kind = rng.random()
        if kind < 0.45 or kind >= 0.8:
            n = int(rng.integers(2, 4))
            slogan = [str(w) for w in rng.choice(SLOGAN_WORDS, size=n)]
            at = int(rng.integers(2, len(words) - 1))
            words[at:at] = slogan
            spans.append((at, at + n, "Slogans"))
        if kind >= 0.45:
            at = int(rng.integers(1, len(words)))
            while any(a <= at < b for a, b, _ in spans) or any(a == at for a, _, _ in spans):
                at = int(rng.integers(1, len(words)))
            words.insert(at, str(rng.choice(LOADED)))
            spans = [(a + (a >= at), b + (a >= at), t) for a, b, t in spans]
            spans.append((at, at + 1, "Loaded_Language"))
    words[0] = words[0][:1].upper() + words[0][1:]
    return words, spans


def make_article(rng, article_id, n_sentences=15, p_propaganda=0.35, repeats=0):
    """Build one article's text plus its gold fragments and sentence labels.

    ``repeats`` lines are exact copies of a propaganda sentence 1 to 8 lines
    earlier (skipped when there is none).
    """
    topic = int(rng.integers(len(TOPIC_WORDS)))
    lines, fragments, labels = [], [], {}
    pos = 0
    repeat_at = set(rng.choice(np.arange(4, n_sentences + 1), size=min(repeats, n_sentences - 3),
                               replace=False).tolist()) if repeats else set()
    for idx in range(1, n_sentences + 1):
        spans = []
        if idx == 1:
            words = [w.capitalize() for w in _plain_words(rng, topic, 4)]
            text = " ".join(words)
            prop = False
        elif idx in repeat_at and [j for j in range(max(2, idx - 8), idx) if labels.get(j)]:
            src = int(rng.choice([j for j in range(max(2, idx - 8), idx) if labels.get(j)]))
            text = lines[src - 1]
            prop = labels[src]
            src_start = sum(len(line) + 1 for line in lines[:src - 1])
            for f in [f for f in fragments if src_start <= f[0] < src_start + len(text)]:
                spans.append((f[0] - src_start, f[1] - src_start, f[2]))
        elif rng.random() < 0.06:
            text = "" if rng.random() < 0.5 else "Advertisement"
            prop = None
        else:
            prop = bool(rng.random() < p_propaganda)
            words, wspans = _sentence(rng, topic, prop)
            text = " ".join(words) + ("!" if prop and rng.random() < 0.3 else ".")
            offs = []
            c = 0
            for w in words:
                offs.append((c, c + len(w)))
                c += len(w) + 1
            spans = [(offs[a][0], offs[b - 1][1], t) for a, b, t in wspans]
        for s, e, t in spans:
            fragments.append((pos + s, pos + e, t))
        if prop is not None:
            labels[idx] = prop
        lines.append(text)
        pos += len(text) + 1
    return "\n".join(lines) + "\n", fragments, labels


def generate_corpus(out_dir, n_articles=20, n_sentences=15, seed=0, first_id=100000, repeats=0):
    """Write articles and gold label files under ``out_dir``.

    Layout: ``articles/article<ID>.txt``, ``slc_labels.tsv``,
    ``flc_labels.tsv``.  Returns a dict of the paths.
    """
    from .corpus import Fragment

    out = Path(out_dir)
    art_dir = out / "articles"
    art_dir.mkdir(parents=True, exist_ok=True)
    rng = substream(seed, "synthetic-corpus")
    slc, flc = {}, []
    for n in range(n_articles):
        aid = str(first_id + n)
        text, frags, labels = make_article(rng, aid, n_sentences, repeats=repeats)
        (art_dir / f"article{aid}.txt").write_text(text, encoding="utf-8")
        flc += [Fragment(aid, s, e, t) for s, e, t in frags]
        slc.update({(aid, i): v for i, v in labels.items()})
    write_slc_labels(out / "slc_labels.tsv", slc)
    write_fragments(out / "flc_labels.tsv", flc)
    return {"articles": art_dir, "slc_labels": out / "slc_labels.tsv", "flc_labels": out / "flc_labels.tsv"}


def generate_resources(out_dir, seed=0, dim=16):
    """Lexicons and an embedding table matching the synthetic vocabulary."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rng = substream(seed, "synthetic-resources")
    sent = [f"{w}\t{fmt_float(-round(0.5 + 0.4 * rng.random(), 3))}" for w in LOADED]
    sent += [f"{w}\t{fmt_float(round(0.4 + 0.4 * rng.random(), 3))}" for w in POSITIVE]
    (out / "sentiment.tsv").write_text("\n".join(sent) + "\n", encoding="utf-8")
    emo = []
    for w in LOADED:
        emo += [f"{w}\tanger\t1", f"{w}\tdisgust\t1", f"{w}\tjoy\t0"]
    emo += ["crime\tfear\t1", "prison\tfear\t1", "prison\tsadness\t1", "great\tjoy\t1"]
    (out / "emotion.tsv").write_text("\n".join(emo) + "\n", encoding="utf-8")
    (out / "loaded.txt").write_text("\n".join(LOADED + ["sell out"]) + "\n", encoding="utf-8")
    senses = []
    for w in _vocab():
        senses.append(f"{w}\tn\t{int(rng.integers(1, 8))}")
        if w in VERBS:
            senses.append(f"{w}\tv\t{int(rng.integers(1, 12))}")
    (out / "senses.tsv").write_text("\n".join(senses) + "\n", encoding="utf-8")
    vocab = _vocab()
    rows = [f"{len(vocab)} {dim}"]
    for w in vocab:
        rows.append(w + " " + " ".join(f"{x:.5f}" for x in rng.normal(size=dim)))
    (out / "embeddings.vec").write_text("\n".join(rows) + "\n", encoding="utf-8")
    return {
        "sentiment_lexicon": out / "sentiment.tsv",
        "emotion_lexicon": out / "emotion.tsv",
        "loaded_lexicon": out / "loaded.txt",
        "sense_lexicon": out / "senses.tsv",
        "embeddings": out / "embeddings.vec",
    }


def simulate_predictions(gold, model_id, seed=0, noise=0.2):
    """Stand-in for an external classifier: noisy probabilities around the gold labels."""
    rng = substream(seed, f"simulated-{model_id}")
    out = []
    for key in sorted(gold):
        base = 0.7 if gold[key] else 0.25
        p = float(np.clip(base + noise * rng.normal(), 0.0, 1.0))
        out.append(SentencePrediction(key[0], key[1], round(p, 6), model_id))
    return out


def write_simulated_predictions(path, gold, model_id, seed=0, noise=0.2):
    write_predictions(path, simulate_predictions(gold, model_id, seed, noise))
