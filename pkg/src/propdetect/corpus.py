"""Articles, gold labels, tokenization, BIO conversion and fold plans.

Offsets everywhere are counted in Unicode code points and span ends are
exclusive.  Sentence indices are 1-based line numbers and are never
renumbered when a line is filtered out.
"""
from __future__ import annotations

import logging
import re
import unicodedata
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataFormatError
from .utils import overlaps, substream

logger = logging.getLogger(__name__)

ARTICLE_RE = re.compile(r"^article(.+)\.txt$")
SLC_LABELS = {"propaganda": True, "non-propaganda": False}


@dataclass
class Token:
    text: str
    start: int
    end: int
    pos: str | None = None
    ner: str | None = None

    @property
    def char_span(self):
        return (self.start, self.end)


@dataclass
class Sentence:
    article_id: str
    index: int
    start: int
    end: int
    text: str
    tokens: list[Token] = field(default_factory=list)

    @property
    def retained(self):
        return len(self.tokens) > 1

    @property
    def char_span(self):
        return (self.start, self.end)

    @property
    def key(self):
        return (self.article_id, self.index)


@dataclass
class Document:
    article_id: str
    raw_text: str
    sentences: list[Sentence] = field(default_factory=list)
    fragments: list["Fragment"] = field(default_factory=list)

    def __len__(self):
        return len(self.raw_text)

    @property
    def retained_sentences(self):
        return [s for s in self.sentences if s.retained]

    def sentence(self, index):
        # sentences are stored in line order, so index i sits at position i - 1
        if 1 <= index <= len(self.sentences):
            return self.sentences[index - 1]
        raise KeyError(index)


@dataclass(frozen=True, order=True)
class Fragment:
    article_id: str
    start: int
    end: int
    technique: str

    def overlaps(self, other):
        return (self.article_id == other.article_id
                and overlaps(self.start, self.end, other.start, other.end))

    @property
    def length(self):
        return self.end - self.start


@dataclass
class TagSequence:
    sentence: Sentence
    tags: list[str]

    def __len__(self):
        return len(self.tags)


@dataclass
class FoldPlan:
    k: int
    assignments: dict[str, int]

    def fold(self, i):
        return sorted(a for a, f in self.assignments.items() if f == i)

    def split(self, i):
        """Return ``(train_ids, test_ids)`` for fold ``i``."""
        test = self.fold(i)
        train = sorted(a for a, f in self.assignments.items() if f != i)
        return train, test


# --------------------------------------------------------------------------
# tokenization

def _is_punct(ch):
    return unicodedata.category(ch)[0] in "PS"


def tokenize(text, offset=0):
    """Split ``text`` on whitespace, peeling punctuation off both ends.

    Every leading or trailing punctuation character becomes its own token.
    A trailing period stays attached when the word already contains an
    internal period, so abbreviations such as ``U.S.`` survive intact.
    Offsets are shifted by ``offset``.
    """
    tokens = []
    for m in re.finditer(r"\S+", text):
        chunk = m.group()
        base = m.start() + offset
        i, j = 0, len(chunk)
        while i < j and _is_punct(chunk[i]):
            i += 1
        while j > i and _is_punct(chunk[j - 1]):
            j -= 1
        if i < j and j < len(chunk) and chunk[j] == "." and "." in chunk[i:j]:
            j += 1
        for k in range(i):
            tokens.append(Token(chunk[k], base + k, base + k + 1))
        if i < j:
            tokens.append(Token(chunk[i:j], base + i, base + j))
        for k in range(j, len(chunk)):
            tokens.append(Token(chunk[k], base + k, base + k + 1))
    return tokens


# --------------------------------------------------------------------------
# loading

def parse_article(article_id, raw_text):
    """Build a :class:`Document` from raw article text (one sentence per line)."""
    doc = Document(article_id, raw_text)
    lines = raw_text.split("\n")
    if raw_text.endswith("\n"):
        lines.pop()
    pos = 0
    for i, line in enumerate(lines, start=1):
        sent = Sentence(article_id, i, pos, pos + len(line), line)
        sent.tokens = tokenize(line, offset=pos)
        doc.sentences.append(sent)
        pos += len(line) + 1
    return doc


def load_articles(directory):
    """Read every ``article<ID>.txt`` in ``directory``.

    Returns a dict of documents keyed by article id, in sorted id order.
    """
    directory = Path(directory)
    if not directory.is_dir():
        raise DataFormatError(f"not a directory: {directory}")
    docs = {}
    for path in sorted(directory.iterdir()):
        m = ARTICLE_RE.match(path.name)
        if m is None or not path.is_file():
            continue
        aid = m.group(1)
        if aid in docs:
            raise DataFormatError(f"duplicate article id {aid!r}", path)
        try:
            raw = path.read_bytes().decode("utf-8")
        except UnicodeDecodeError as e:
            raise DataFormatError(f"not valid UTF-8 ({e.reason} at byte {e.start})", path) from e
        except OSError as e:
            raise DataFormatError(f"unreadable file: {e}", path) from e
        docs[aid] = parse_article(aid, raw)
    return dict(sorted(docs.items()))


def _rows(path):
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise DataFormatError(f"cannot read: {e}", path) from e
    for lineno, line in enumerate(text.split("\n"), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        yield lineno, line.split("\t")


def _int(value, path, lineno, what):
    try:
        return int(value)
    except ValueError:
        raise DataFormatError(f"{what} is not an integer: {value!r}", path, lineno) from None


def load_flc_labels(path, documents=None, with_model_id=False):
    """Parse a fragment TSV (``article_id, technique, start, end[, model_id]``).

    When ``documents`` is given each fragment is bounds-checked against its
    article and the gold lists are attached to ``Document.fragments``.
    Duplicate rows are kept.  With ``with_model_id`` the return value is a
    list of ``(fragment, model_id)`` pairs.
    """
    frags = []
    for lineno, cols in _rows(path):
        if len(cols) not in (4, 5):
            raise DataFormatError(f"expected 4 or 5 tab-separated fields, got {len(cols)}", path, lineno)
        aid, technique = cols[0], cols[1]
        start = _int(cols[2], path, lineno, "start")
        end = _int(cols[3], path, lineno, "end")
        if not technique:
            raise DataFormatError("empty technique label", path, lineno)
        if start < 0 or start >= end:
            raise DataFormatError(f"invalid span [{start}, {end})", path, lineno)
        if documents is not None:
            if aid not in documents:
                raise DataFormatError(f"unknown article id {aid!r}", path, lineno)
            n = len(documents[aid].raw_text)
            if end > n:
                raise DataFormatError(f"span end {end} beyond document length {n}", path, lineno)
        frag = Fragment(aid, start, end, technique)
        if with_model_id:
            frags.append((frag, cols[4] if len(cols) == 5 else ""))
        else:
            frags.append(frag)
    if documents is not None and not with_model_id:
        by_doc = {}
        for f in frags:
            by_doc.setdefault(f.article_id, []).append(f)
        for aid, doc in documents.items():
            doc.fragments = by_doc.get(aid, [])
    return frags


def technique_vocabulary(fragments):
    return sorted({f.technique for f in fragments})


def load_slc_labels(path, documents=None):
    """Parse an SLC label TSV into ``{(article_id, sentence_index): bool}``.

    Rows for filtered-out sentences are dropped when ``documents`` is given.
    """
    labels = {}
    for lineno, cols in _rows(path):
        if len(cols) != 3:
            raise DataFormatError(f"expected 3 tab-separated fields, got {len(cols)}", path, lineno)
        aid, idx, label = cols[0], _int(cols[1], path, lineno, "sentence index"), cols[2].strip()
        if label not in SLC_LABELS:
            raise DataFormatError(f"unknown label {label!r}", path, lineno)
        if documents is not None:
            doc = documents.get(aid)
            if doc is None or not 1 <= idx <= len(doc.sentences):
                raise DataFormatError(f"unknown sentence ({aid}, {idx})", path, lineno)
            if not doc.sentence(idx).retained:
                continue
        labels[(aid, idx)] = SLC_LABELS[label]
    return labels


def write_slc_labels(path, labels):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for (aid, idx), lab in sorted(labels.items(), key=lambda kv: (kv[0][0], kv[0][1])):
            fh.write(f"{aid}\t{idx}\t{'propaganda' if lab else 'non-propaganda'}\n")


def write_fragments(path, fragments, model_id=None):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for f in sorted(fragments):
            row = f"{f.article_id}\t{f.technique}\t{f.start}\t{f.end}"
            if model_id is not None:
                row += f"\t{model_id}"
            fh.write(row + "\n")


def slc_gold_from_fragments(documents):
    """Sentence labels implied by gold fragments: propaganda iff a fragment touches it."""
    labels = {}
    for doc in documents.values():
        for s in doc.retained_sentences:
            labels[s.key] = any(overlaps(f.start, f.end, s.start, s.end) for f in doc.fragments)
    return labels


# --------------------------------------------------------------------------
# BIO

def _token_range(sentence, frag):
    """Indices ``[i, j)`` of the tokens a fragment touches (outward snapping)."""
    idx = [k for k, t in enumerate(sentence.tokens) if overlaps(t.start, t.end, frag.start, frag.end)]
    if not idx:
        return None
    return idx[0], idx[-1] + 1


def project_fragments(sentence, fragments):
    """Reduce possibly overlapping fragments to a single non-overlapping layer.

    Earliest start wins, then the longest span.  Conflicts are judged on the
    token ranges after snapping.  Returns ``[(i, j, technique), ...]``.
    """
    cands = []
    for f in fragments:
        if f.article_id != sentence.article_id:
            continue
        rng = _token_range(sentence, f)
        if rng is not None:
            cands.append((f.start, -(f.end - f.start), f.technique, rng))
    cands.sort()
    kept = []
    for _, _, technique, (i, j) in cands:
        if all(not overlaps(i, j, a, b) for a, b, _ in kept):
            kept.append((i, j, technique))
    return sorted(kept)


def encode_bio(sentence, fragments):
    tags = ["O"] * len(sentence.tokens)
    for i, j, technique in project_fragments(sentence, fragments):
        tags[i] = f"B-{technique}"
        for k in range(i + 1, j):
            tags[k] = f"I-{technique}"
    return TagSequence(sentence, tags)


def split_tag(tag):
    """``"B-Doubt"`` -> ``("B", "Doubt")``; ``"O"`` -> ``("O", None)``."""
    if tag == "O":
        return "O", None
    if len(tag) > 2 and tag[1] == "-" and tag[0] in "BI":
        return tag[0], tag[2:]
    raise DataFormatError(f"unknown tag {tag!r}")


def bio_spans(tags):
    """Token spans ``(i, j, label)`` of maximal ``B-t I-t*`` runs.

    An ``I-t`` that does not continue a run of the same label opens a new one.
    """
    spans = []
    cur = None
    for k, tag in enumerate(tags):
        prefix, label = split_tag(tag)
        if prefix == "I" and cur is not None and cur[2] == label:
            cur[1] = k + 1
            continue
        if cur is not None:
            spans.append(tuple(cur))
            cur = None
        if prefix != "O":
            cur = [k, k + 1, label]
    if cur is not None:
        spans.append(tuple(cur))
    return spans


def decode_bio(tag_sequence, sentence=None):
    if sentence is None:
        sentence = tag_sequence.sentence
        tags = tag_sequence.tags
    else:
        tags = tag_sequence.tags if isinstance(tag_sequence, TagSequence) else list(tag_sequence)
    if len(tags) != len(sentence.tokens):
        raise ValueError(f"{len(tags)} tags for {len(sentence.tokens)} tokens")
    toks = sentence.tokens
    return [Fragment(sentence.article_id, toks[i].start, toks[j - 1].end, label)
            for i, j, label in bio_spans(tags)]


def tag_set(techniques):
    """``O`` followed by ``B-t, I-t`` for each technique in sorted order."""
    tags = ["O"]
    for t in sorted(techniques):
        tags += [f"B-{t}", f"I-{t}"]
    return tags


# --------------------------------------------------------------------------
# folds

def make_folds(documents, k, seed=0):
    """Shuffle article ids with a seeded generator and deal them round-robin."""
    ids = sorted(documents)
    if k < 2:
        raise ValueError(f"fold count must be >= 2, got {k}")
    if k > len(ids):
        raise ValueError(f"cannot split {len(ids)} articles into {k} folds")
    order = substream(seed, "folds").permutation(len(ids))
    return FoldPlan(k, {ids[p]: n % k for n, p in enumerate(order)})
