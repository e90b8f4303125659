from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from ..errors import SchemaMismatchError
from .embeddings import sentence_embedding
from .extractors import FeatureVector, layout_features, linguistic_features
from .lexicons import Lexicons

FEATURE_GROUPS = ("embedding", "linguistic", "layout", "topical")


def schema_id_for(toggles, dimension=None, n_topics=None):
    parts = []
    for g in FEATURE_GROUPS:
        if g not in toggles:
            continue
        if g == "embedding":
            parts.append(f"embedding{dimension}")
        elif g == "topical":
            parts.append(f"topical{n_topics}" if n_topics else "topical")
        else:
            parts.append(g)
    return "+".join(parts) or "empty"


def assemble_features(sentence, document, lexicons=None, table=None, topic_features=None,
                      toggles=FEATURE_GROUPS, n_topics=None):
    """Concatenate the enabled blocks: embedding, linguistic, layout, topical."""
    toggles = set(toggles)
    unknown = toggles - set(FEATURE_GROUPS)
    if unknown:
        raise ValueError(f"unknown feature groups: {sorted(unknown)}")
    blocks = []
    dim = None
    if "embedding" in toggles:
        if table is None:
            raise ValueError("embedding features requested without an embedding table")
        dim = table.dimension
        vec = sentence_embedding(sentence, table)
        blocks.append(FeatureVector(tuple(f"emb_{i}" for i in range(dim)), vec, "embedding"))
    if "linguistic" in toggles:
        blocks.append(linguistic_features(sentence, lexicons or Lexicons()))
    if "layout" in toggles:
        blocks.append(layout_features(sentence, document))
    if "topical" in toggles:
        if topic_features is None:
            raise ValueError("topical features requested without topic features")
        blocks.append(topic_features)
    return FeatureVector.concat(blocks, schema_id_for(toggles, dim, n_topics))


def check_schema(expected, vectors):
    for v in vectors:
        if v.schema_id != expected:
            raise SchemaMismatchError(f"feature schema {v.schema_id!r} does not match {expected!r}")


class SentenceFeaturizer(TransformerMixin, BaseEstimator):
    """Turn ``(document, sentence)`` pairs into a dense feature matrix.

    ``fit`` only trains the topic model (when the topical block is on and no
    fitted ``lda`` was supplied), using every distinct document among the
    inputs.
    """

    def __init__(self, lexicons=None, embeddings=None, toggles=FEATURE_GROUPS,
                 n_topics=10, lda_iter=500, lda_infer_iter=50, random_state=0, lda=None):
        self.lexicons = lexicons
        self.embeddings = embeddings
        self.toggles = toggles
        self.n_topics = n_topics
        self.lda_iter = lda_iter
        self.lda_infer_iter = lda_infer_iter
        self.random_state = random_state
        self.lda = lda

    def fit(self, X, y=None):
        from ..topics import GibbsLDA
        self.lda_ = self.lda
        if "topical" in self.toggles and self.lda_ is None:
            docs = _unique_documents(X)
            self.lda_ = GibbsLDA(n_topics=self.n_topics, n_iter=self.lda_iter,
                                 n_infer_iter=self.lda_infer_iter,
                                 random_state=self.random_state).fit(
                [[t.text for s in d.sentences for t in s.tokens] for d in docs])
        self._topic_cache = {}
        probe = self.vectors(X[:1]) if len(X) else []
        self.feature_names_ = probe[0].names if probe else ()
        self.schema_id_ = probe[0].schema_id if probe else schema_id_for(
            self.toggles, getattr(self.embeddings, "dimension", None), self.n_topics)
        return self

    def vectors(self, X):
        """Feature vectors for ``(document, sentence)`` pairs."""
        from ..topics import document_topics, topical_features
        out = []
        for doc, sent in X:
            tf = None
            if "topical" in self.toggles:
                key = (doc.article_id, id(doc))
                if key not in self._topic_cache:
                    self._topic_cache[key] = document_topics(doc, self.lda_)
                tf = topical_features(sent, doc, self.lda_, self._topic_cache[key])
            out.append(assemble_features(sent, doc, self.lexicons, self.embeddings, tf,
                                         self.toggles, self.lda_.n_topics if self.lda_ is not None else None))
        return out

    def transform(self, X):
        check_is_fitted(self, "schema_id_")
        vecs = self.vectors(X)
        check_schema(self.schema_id_, vecs)
        if not vecs:
            return np.zeros((0, len(self.feature_names_)))
        return np.vstack([v.values for v in vecs])

    def get_feature_names_out(self, input_features=None):
        check_is_fitted(self, "feature_names_")
        return np.array(self.feature_names_, dtype=object)


def _unique_documents(pairs):
    seen = {}
    for doc, _ in pairs:
        seen.setdefault(doc.article_id, doc)
    return [seen[k] for k in sorted(seen)]
