"""Feature-based linear-chain CRF.

Each token carries a list of string features.  The score of a tag sequence
``y`` is the sum of emission weights ``W[f, y_t]`` over the token's
features, transition weights ``trans[y_{t-1}, y_t]``, and a start weight
``start[y_0]``.  BIO-invalid moves (an ``I-t`` that does not follow
``B-t``/``I-t``) carry a fixed large penalty instead of a hard mask.
"""
from __future__ import annotations

from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.special import logsumexp
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from ..corpus import split_tag, tag_set
from ..errors import DataFormatError, InvariantError
from ..utils import fmt_float, substream

FORMAT_VERSION = "1"
INVALID_PENALTY = -1.0e4


def transition_penalties(tags):
    """``(pair, start)`` penalty arrays for the BIO constraints over ``tags``."""
    K = len(tags)
    pair = np.zeros((K, K))
    start = np.zeros(K)
    parsed = []
    for t in tags:
        try:
            parsed.append(split_tag(t))
        except DataFormatError:
            parsed.append((None, None))
    for j, (pj, lj) in enumerate(parsed):
        if pj != "I":
            continue
        start[j] = INVALID_PENALTY
        for i, (pi, li) in enumerate(parsed):
            if pi not in ("B", "I") or li != lj:
                pair[i, j] = INVALID_PENALTY
    return pair, start


class LinearChainCRF(BaseEstimator):
    """Linear-chain CRF over string token features.

    ``fit(X, y)`` takes ``X`` as a list of sentences, each a list of
    per-token feature-name lists, and ``y`` as the matching tag lists.
    Training maximizes the penalized conditional log-likelihood by
    full-batch gradient ascent with step halving on any decrease.

    Parameters
    ----------
    l2 : float
        Strength of the ``l2/2 * ||theta||^2`` penalty.
    epochs : int
    learning_rate : float
        Initial step size; grows by 10% after each accepted step.
    init_scale : float
        Half-width of the seeded uniform initialization.
    tags : list of str or None
        Tag set with ``O`` first.  Derived from ``y`` when omitted.
    random_state : int
    """

    def __init__(self, l2=0.1, epochs=100, learning_rate=0.05, init_scale=0.01, tags=None,
                 random_state=0):
        self.l2 = l2
        self.epochs = epochs
        self.learning_rate = learning_rate
        self.init_scale = init_scale
        self.tags = tags
        self.random_state = random_state

    # -- parameters ------------------------------------------------------

    def _init_params(self, features, tags):
        self.tags_ = list(tags)
        self.tag_index_ = {t: i for i, t in enumerate(self.tags_)}
        self.features_ = list(features)
        self.feature_index_ = {f: i for i, f in enumerate(self.features_)}
        K, F = len(self.tags_), len(self.features_)
        self.penalty_, self.start_penalty_ = transition_penalties(self.tags_)
        rng = substream(self.random_state, "crf-init")
        a = self.init_scale
        self.W_ = rng.uniform(-a, a, size=(F, K))
        self.trans_ = rng.uniform(-a, a, size=(K, K))
        self.start_ = rng.uniform(-a, a, size=K)

    def get_theta(self):
        return np.concatenate([self.W_.ravel(), self.trans_.ravel(), self.start_])

    def set_theta(self, theta):
        F, K = self.W_.shape
        self.W_ = theta[:F * K].reshape(F, K).copy()
        self.trans_ = theta[F * K:F * K + K * K].reshape(K, K).copy()
        self.start_ = theta[F * K + K * K:].copy()

    # -- encoding --------------------------------------------------------

    def _design(self, X):
        """Sparse token-by-feature indicator matrix and sentence lengths."""
        rows, cols = [], []
        lengths = []
        r = 0
        for sent in X:
            lengths.append(len(sent))
            for feats in sent:
                for f in feats:
                    j = self.feature_index_.get(f)
                    if j is not None:
                        rows.append(r)
                        cols.append(j)
                r += 1
        M = sp.csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(r, len(self.features_)))
        return M, np.array(lengths, dtype=np.int64)

    def _encode_tags(self, y):
        out = []
        for seq in y:
            try:
                out.append(np.array([self.tag_index_[t] for t in seq], dtype=np.int64))
            except KeyError as e:
                raise ValueError(f"tag {e.args[0]!r} is not in the tag set") from None
        return out

    def _padded_emissions(self, M, lengths):
        flat = M @ self.W_
        N, T, K = len(lengths), int(lengths.max()), self.W_.shape[1]
        E = np.zeros((N, T, K))
        mask = np.arange(T)[None, :] < lengths[:, None]
        E[mask] = flat
        return E, mask

    def _transitions(self):
        return self.trans_ + self.penalty_, self.start_ + self.start_penalty_

    # -- inference -------------------------------------------------------

    def _forward(self, E, mask):
        A, s = self._transitions()
        N, T, K = E.shape
        alpha = np.empty((N, T, K))
        alpha[:, 0] = s + E[:, 0]
        for t in range(1, T):
            nxt = logsumexp(alpha[:, t - 1, :, None] + A[None], axis=1) + E[:, t]
            alpha[:, t] = np.where(mask[:, t, None], nxt, alpha[:, t - 1])
        return alpha, logsumexp(alpha[:, T - 1], axis=1)

    def _backward(self, E, mask):
        A, _ = self._transitions()
        N, T, K = E.shape
        beta = np.zeros((N, T, K))
        for t in range(T - 2, -1, -1):
            nxt = logsumexp(A[None] + (E[:, t + 1] + beta[:, t + 1])[:, None, :], axis=2)
            beta[:, t] = np.where(mask[:, t + 1, None], nxt, 0.0)
        return beta

    def _gold_scores(self, E, y):
        A, s = self._transitions()
        out = np.empty(len(y))
        for n, seq in enumerate(y):
            sc = s[seq[0]] + E[n, np.arange(len(seq)), seq].sum()
            sc += A[seq[:-1], seq[1:]].sum()
            out[n] = sc
        return out

    def _objective(self, M, lengths, y, with_grad=True):
        E, mask = self._padded_emissions(M, lengths)
        alpha, logZ = self._forward(E, mask)
        gold = self._gold_scores(E, y)
        if not (np.all(np.isfinite(logZ)) and np.all(logZ >= gold - 1e-9 * np.abs(gold).clip(1))):
            raise InvariantError("log-partition below gold score or non-finite")
        theta = self.get_theta()
        value = float(gold.sum() - logZ.sum() - 0.5 * self.l2 * theta @ theta)
        if not with_grad:
            return value, None
        beta = self._backward(E, mask)
        A, _ = self._transitions()
        unary = np.exp(alpha + beta - logZ[:, None, None]) * mask[..., None]
        K = A.shape[0]
        pair = np.zeros((K, K))
        for t in range(1, E.shape[1]):
            m = mask[:, t]
            if not m.any():
                break
            lp = (alpha[m, t - 1, :, None] + A[None] + (E[m, t] + beta[m, t])[:, None, :]
                  - logZ[m, None, None])
            pair += np.exp(lp).sum(axis=0)
        gold_onehot = np.zeros((M.shape[0], K))
        flat_y = np.concatenate(y)
        gold_onehot[np.arange(len(flat_y)), flat_y] = 1.0
        gW = M.T @ (gold_onehot - unary[mask])
        gold_pair = np.zeros((K, K))
        gold_start = np.zeros(K)
        for seq in y:
            np.add.at(gold_pair, (seq[:-1], seq[1:]), 1.0)
            gold_start[seq[0]] += 1.0
        gT = gold_pair - pair
        gS = gold_start - unary[:, 0].sum(axis=0)
        grad = np.concatenate([np.asarray(gW).ravel(), gT.ravel(), gS]) - self.l2 * theta
        return value, grad

    # -- public API ------------------------------------------------------

    def fit(self, X, y):
        if not X:
            raise ValueError("no training sequences")
        if len(X) != len(y) or any(len(a) != len(b) for a, b in zip(X, y)):
            raise ValueError("feature and tag sequences differ in length")
        if any(len(s) == 0 for s in X):
            raise ValueError("empty sequence")
        tags = self.tags
        if tags is None:
            labels = {split_tag(t)[1] for seq in y for t in seq} - {None}
            tags = tag_set(labels)
        features = sorted({f for sent in X for feats in sent for f in feats})
        self._init_params(features, tags)
        M, lengths = self._design(X)
        yy = self._encode_tags(y)
        value, grad = self._objective(M, lengths, yy)
        step = float(self.learning_rate)
        curve = [value]
        for _ in range(self.epochs):
            theta = self.get_theta()
            for _ in range(60):
                self.set_theta(theta + step * grad)
                new_value, new_grad = self._objective(M, lengths, yy)
                if new_value >= value:
                    break
                step /= 2
            else:
                self.set_theta(theta)
                break
            value, grad = new_value, new_grad
            curve.append(value)
            step *= 1.1
        self.objective_curve_ = curve
        return self

    def log_likelihood(self, X, y):
        """Penalized conditional log-likelihood and its gradient w.r.t. ``get_theta()``."""
        M, lengths = self._design(X)
        return self._objective(M, lengths, self._encode_tags(y))

    def emissions(self, token_features):
        M, lengths = self._design([token_features])
        return np.asarray(M @ self.W_)

    def score(self, token_features, tags):
        check_is_fitted(self, "W_")
        if len(token_features) != len(tags):
            raise ValueError("length mismatch")
        E = self.emissions(token_features)
        seq = self._encode_tags([tags])[0]
        A, s = self._transitions()
        return float(s[seq[0]] + E[np.arange(len(seq)), seq].sum() + A[seq[:-1], seq[1:]].sum())

    def log_partition(self, token_features):
        E = self.emissions(token_features)[None]
        _, logZ = self._forward(E, np.ones(E.shape[:2], dtype=bool))
        return float(logZ[0])

    def viterbi(self, token_features):
        check_is_fitted(self, "W_")
        if not token_features:
            return []
        E = self.emissions(token_features)
        A, s = self._transitions()
        K = A.shape[0]
        delta = s + E[0]
        back = []
        for t in range(1, len(E)):
            scores = delta[:, None] + A
            best = np.argmax(scores, axis=0)  # first maximum = lowest index
            back.append(best)
            delta = scores[best, np.arange(K)] + E[t]
        k = int(np.argmax(delta))
        path = [k]
        for best in reversed(back):
            k = int(best[k])
            path.append(k)
        return [self.tags_[i] for i in reversed(path)]

    def predict(self, X):
        return [self.viterbi(sent) for sent in X]

    # -- persistence -----------------------------------------------------

    def save(self, path):
        check_is_fitted(self, "W_")
        row = lambda v: "\t".join(fmt_float(x) for x in v)  # noqa: E731
        lines = [
            f"propdetect-crf\t{FORMAT_VERSION}",
            f"l2\t{fmt_float(self.l2)}",
            "tags\t" + "\t".join(self.tags_),
            f"n_features\t{len(self.features_)}",
            "start\t" + row(self.start_),
            *(f"trans\t{t}\t{row(r)}" for t, r in zip(self.tags_, self.trans_)),
            *(f"emit\t{f}\t{row(r)}" for f, r in zip(self.features_, self.W_)),
        ]
        Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")

    @classmethod
    def load(cls, path):
        path = Path(path)
        lines = path.read_text(encoding="utf-8").rstrip("\n").split("\n")
        if lines[0] != f"propdetect-crf\t{FORMAT_VERSION}":
            raise DataFormatError("not a CRF model file", path, 1)
        try:
            l2 = float(lines[1].split("\t")[1])
            tags = lines[2].split("\t")[1:]
            F = int(lines[3].split("\t")[1])
            K = len(tags)
            start = np.array([float(x) for x in lines[4].split("\t")[1:]])
            trans_rows = [line.split("\t") for line in lines[5:5 + K]]
            emit_rows = [line.split("\t") for line in lines[5 + K:]]
            if len(emit_rows) != F or len(start) != K:
                raise ValueError("row counts disagree with header")
            model = cls(l2=l2, tags=tags)
            model._init_params([r[1] for r in emit_rows], tags)
            model.start_ = start
            model.trans_ = np.array([[float(x) for x in r[2:]] for r in trans_rows])
            model.W_ = np.array([[float(x) for x in r[2:]] for r in emit_rows]).reshape(F, K)
            if model.trans_.shape != (K, K):
                raise ValueError("transition matrix is not square over the tag set")
        except (IndexError, ValueError) as e:
            raise DataFormatError(f"malformed CRF model file: {e}", path) from None
        return model


def crf_score(model, token_features, tag_sequence):
    tags = getattr(tag_sequence, "tags", tag_sequence)
    return model.score(token_features, list(tags))


def viterbi(model, token_features):
    return model.viterbi(token_features)


def train_crf(sequences, gold_tags, l2=0.1, epochs=100, learning_rate=0.05, seed=0, tags=None):
    gold = [getattr(g, "tags", g) for g in gold_tags]
    return LinearChainCRF(l2=l2, epochs=epochs, learning_rate=learning_rate, tags=tags,
                          random_state=seed).fit(sequences, gold)
