"""LDA by collapsed Gibbs sampling and dominant-topic sentence features."""
from __future__ import annotations

from collections import Counter
from pathlib import Path

import numpy as np
from numba import njit
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .errors import DataFormatError, InvariantError
from .features.extractors import FeatureVector
from .utils import fmt_float, substream

STOPWORDS = frozenset("""
a about above after again against all am an and any are as at be because been before being
below between both but by can could did do does doing down during each few for from further
had has have having he her here hers herself him himself his how i if in into is it its itself
just me more most my myself no nor not now of off on once only or other our ours ourselves out
over own same she should so some such than that the their theirs them themselves then there
these they this those through to too under until up very was we were what when where which
while who whom why will with would you your yours yourself yourselves also said says one two
""".split())

FORMAT_VERSION = "1"


@njit(cache=True)
def _draw(p, total, u):
    r = u * total
    k = 0
    last = p.shape[0] - 1
    while k < last and p[k] <= r:
        k += 1
    return k


@njit(cache=True)
def _train_sweep(words, docs, z, ndk, nkw, nk, alpha, beta, vbeta, u):
    n_topics = nk.shape[0]
    p = np.empty(n_topics)
    for i in range(words.shape[0]):
        w = words[i]
        d = docs[i]
        k = z[i]
        ndk[d, k] -= 1
        nkw[k, w] -= 1
        nk[k] -= 1
        total = 0.0
        for t in range(n_topics):
            total += (ndk[d, t] + alpha) * (nkw[t, w] + beta) / (nk[t] + vbeta)
            p[t] = total
        k = _draw(p, total, u[i])
        z[i] = k
        ndk[d, k] += 1
        nkw[k, w] += 1
        nk[k] += 1


@njit(cache=True)
def _infer_sweep(words, z, nd, nkw, nk, alpha, beta, vbeta, u):
    n_topics = nk.shape[0]
    p = np.empty(n_topics)
    for i in range(words.shape[0]):
        w = words[i]
        nd[z[i]] -= 1
        total = 0.0
        for t in range(n_topics):
            total += (nd[t] + alpha) * (nkw[t, w] + beta) / (nk[t] + vbeta)
            p[t] = total
        k = _draw(p, total, u[i])
        z[i] = k
        nd[k] += 1


class GibbsLDA(TransformerMixin, BaseEstimator):
    """Latent Dirichlet allocation trained by collapsed Gibbs sampling.

    ``fit`` takes a list of token lists (one per document); ``transform``
    returns one row of topic proportions per input token list.

    Parameters
    ----------
    n_topics : int
    alpha : float or None
        Symmetric document-topic prior; ``None`` means ``50 / n_topics``.
    beta : float
        Symmetric topic-word prior.
    n_iter : int
        Training sweeps.
    n_infer_iter : int
        Sweeps per document at inference time, with model counts frozen.
    min_token_length, min_count, stopwords
        Vocabulary filtering applied before training.
    random_state : int
    """

    def __init__(self, n_topics=10, alpha=None, beta=0.01, n_iter=500, n_infer_iter=50,
                 min_token_length=3, min_count=2, stopwords=True, random_state=0):
        self.n_topics = n_topics
        self.alpha = alpha
        self.beta = beta
        self.n_iter = n_iter
        self.n_infer_iter = n_infer_iter
        self.min_token_length = min_token_length
        self.min_count = min_count
        self.stopwords = stopwords
        self.random_state = random_state

    @property
    def alpha_(self):
        return 50.0 / self.n_topics if self.alpha is None else float(self.alpha)

    def _normalize(self, tokens):
        out = []
        for t in tokens:
            t = t.lower()
            if len(t) < self.min_token_length or not any(c.isalnum() for c in t):
                continue
            if self.stopwords and t in STOPWORDS:
                continue
            out.append(t)
        return out

    def _encode(self, tokens):
        ids = (self.vocabulary_.get(t) for t in self._normalize(tokens))
        return np.array([i for i in ids if i is not None], dtype=np.int64)

    def fit(self, X, y=None, callback=None):
        if self.n_topics < 2:
            raise ValueError("n_topics must be >= 2")
        if self.n_iter < 0:
            raise ValueError("n_iter must be >= 0")
        docs = [self._normalize(d) for d in X]
        counts = Counter(t for d in docs for t in d)
        vocab = sorted(t for t, c in counts.items() if c >= self.min_count)
        if not vocab:
            raise ValueError("empty vocabulary after filtering")
        self.vocabulary_ = {t: i for i, t in enumerate(vocab)}
        words, doc_ids = [], []
        for d, toks in enumerate(docs):
            for t in toks:
                if t in self.vocabulary_:
                    words.append(self.vocabulary_[t])
                    doc_ids.append(d)
        words = np.array(words, dtype=np.int64)
        doc_ids = np.array(doc_ids, dtype=np.int64)
        K, V = self.n_topics, len(vocab)
        rng = substream(self.random_state, "lda")
        z = rng.integers(0, K, size=len(words)).astype(np.int64)
        ndk = np.zeros((len(docs), K), dtype=np.int64)
        nkw = np.zeros((K, V), dtype=np.int64)
        np.add.at(ndk, (doc_ids, z), 1)
        np.add.at(nkw, (z, words), 1)
        nk = nkw.sum(axis=1)
        # the sweeps update these arrays in place, so callbacks see live state
        self.assignments_ = z
        self.doc_topic_counts_ = ndk
        self.topic_word_counts_ = nkw
        self.topic_counts_ = nk
        self.n_tokens_ = len(words)
        alpha, beta = self.alpha_, float(self.beta)
        for sweep in range(self.n_iter):
            _train_sweep(words, doc_ids, z, ndk, nkw, nk, alpha, beta, V * beta, rng.random(len(words)))
            if callback is not None:
                callback(sweep, self)
        return self

    def check_counts(self):
        nkw = self.topic_word_counts_
        ok = (np.array_equal(nkw.sum(axis=1), self.topic_counts_)
              and nkw.sum() == self.n_tokens_ and (nkw >= 0).all())
        z = getattr(self, "assignments_", None)
        if ok and z is not None:
            ok = np.array_equal(np.bincount(z, minlength=self.n_topics), self.topic_counts_)
        if not ok:
            raise InvariantError("topic-word counts inconsistent with assignments")

    def topic_word_distribution(self):
        check_is_fitted(self, "topic_word_counts_")
        phi = self.topic_word_counts_ + self.beta
        return phi / phi.sum(axis=1, keepdims=True)

    def infer(self, tokens):
        """Topic proportions for one token list; all-OOV input gives the uniform vector."""
        check_is_fitted(self, "topic_word_counts_")
        K = self.n_topics
        words = self._encode(tokens)
        alpha, beta = self.alpha_, float(self.beta)
        nd = np.zeros(K, dtype=np.int64)
        if len(words):
            # fresh stream per call keeps inference a pure function of its input
            rng = substream(self.random_state, "lda-infer")
            z = rng.integers(0, K, size=len(words)).astype(np.int64)
            np.add.at(nd, z, 1)
            V = self.topic_word_counts_.shape[1]
            for _ in range(self.n_infer_iter):
                _infer_sweep(words, z, nd, self.topic_word_counts_, self.topic_counts_,
                             alpha, beta, V * beta, rng.random(len(words)))
        theta = (nd + alpha) / (len(words) + K * alpha)
        return theta / theta.sum()

    def transform(self, X):
        return np.vstack([self.infer(toks) for toks in X]) if len(X) else np.zeros((0, self.n_topics))

    # persistence -------------------------------------------------------

    def save(self, path):
        check_is_fitted(self, "topic_word_counts_")
        vocab = sorted(self.vocabulary_, key=self.vocabulary_.get)
        lines = [
            f"propdetect-lda\t{FORMAT_VERSION}",
            f"n_topics\t{self.n_topics}",
            f"vocab_size\t{len(vocab)}",
            f"alpha\t{fmt_float(self.alpha_)}",
            f"beta\t{fmt_float(self.beta)}",
            f"seed\t{self.random_state}",
            f"n_infer_iter\t{self.n_infer_iter}",
            f"min_token_length\t{self.min_token_length}",
            f"stopwords\t{int(bool(self.stopwords))}",
            "vocabulary",
            *vocab,
            "counts",
            *(" ".join(str(int(c)) for c in row) for row in self.topic_word_counts_),
        ]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path):
        path = Path(path)
        lines = path.read_text(encoding="utf-8").rstrip("\n").split("\n")
        if not lines or lines[0] != f"propdetect-lda\t{FORMAT_VERSION}":
            raise DataFormatError("not an LDA model file (or unsupported version)", path, 1)
        try:
            head = dict(line.split("\t", 1) for line in lines[1:9])
            K, V = int(head["n_topics"]), int(head["vocab_size"])
            model = cls(n_topics=K, alpha=float(head["alpha"]), beta=float(head["beta"]),
                        n_infer_iter=int(head["n_infer_iter"]),
                        min_token_length=int(head["min_token_length"]),
                        stopwords=bool(int(head["stopwords"])), random_state=int(head["seed"]))
            assert lines[9] == "vocabulary" and lines[10 + V] == "counts"
            vocab = lines[10:10 + V]
            nkw = np.array([[int(c) for c in row.split()] for row in lines[11 + V:11 + V + K]],
                           dtype=np.int64)
            assert nkw.shape == (K, V)
        except (KeyError, ValueError, AssertionError, IndexError) as e:
            raise DataFormatError(f"malformed LDA model file: {e!r}", path) from None
        model.vocabulary_ = {t: i for i, t in enumerate(vocab)}
        model.topic_word_counts_ = nkw
        model.topic_counts_ = nkw.sum(axis=1)
        model.n_tokens_ = int(nkw.sum())
        return model


def fit_lda(documents, K=10, alpha=None, beta=0.01, iterations=500, seed=0, **kwargs):
    """Fit on token lists, or on ``Document`` objects (all their sentence tokens)."""
    return GibbsLDA(n_topics=K, alpha=alpha, beta=beta, n_iter=iterations,
                    random_state=seed, **kwargs).fit([_doc_tokens(d) for d in documents])


def infer_doc_topics(model, token_list):
    return model.infer(list(token_list))


def dominant_topic(proportions):
    # np.argmax returns the first maximum, i.e. the lowest index on ties
    return int(np.argmax(np.asarray(proportions)))


def _doc_tokens(doc):
    if hasattr(doc, "sentences"):
        return [t.text for s in doc.sentences for t in s.tokens]
    return list(doc)


def document_topics(document, model):
    """Dominant topic of the document and of each retained sentence (by index)."""
    dt_doc = dominant_topic(model.infer(_doc_tokens(document)))
    dt_sent = {s.index: dominant_topic(model.infer([t.text for t in s.tokens]))
               for s in document.retained_sentences}
    return dt_doc, dt_sent


def topic_match_features(dt_sent, dt_doc, dt_prev=None, dt_next=None):
    return FeatureVector.from_pairs([
        ("dt_sent_eq_doc", int(dt_sent == dt_doc)),
        ("dt_sent_eq_next", int(dt_next is not None and dt_sent == dt_next)),
        ("dt_sent_eq_prev", int(dt_prev is not None and dt_sent == dt_prev)),
    ], "topical")


def topical_features(sentence, document, model, topics=None):
    """Binary agreement of the sentence's dominant topic with its document and neighbours.

    ``topics`` may carry a precomputed :func:`document_topics` result.
    """
    dt_doc, dt_sent = topics if topics is not None else document_topics(document, model)
    order = [s.index for s in document.retained_sentences]
    r = order.index(sentence.index)
    prev = dt_sent[order[r - 1]] if r > 0 else None
    nxt = dt_sent[order[r + 1]] if r + 1 < len(order) else None
    return topic_match_features(dt_sent[sentence.index], dt_doc, prev, nxt)
