from __future__ import annotations

from ..features.embeddings import cosine, sentence_embedding


def repetition_postprocess(document, sentence_embeddings, labels, window=10, lam=0.99):
    """Flag sentences that repeat one of the preceding ``window`` sentences.

    A retained sentence becomes propaganda when its cosine similarity to any
    of the previous ``window`` retained sentences is strictly greater than
    ``lam``.  Labels only ever flip from False to True.  ``sentence_embeddings``
    and ``labels`` are keyed by ``(article_id, sentence_index)``.
    """
    if window < 1:
        raise ValueError("window must be >= 1")
    if not 0 < lam <= 1:
        raise ValueError("lambda must lie in (0, 1]")
    out = dict(labels)
    seen = []
    for sent in document.retained_sentences:
        vec = sentence_embeddings[sent.key]
        if seen and max(cosine(vec, prev) for prev in seen[-window:]) > lam:
            out[sent.key] = True
        seen.append(vec)
    return out


def postprocess_corpus(documents, table, labels, window=10, lam=0.99):
    out = dict(labels)
    for doc in documents.values():
        embs = {s.key: sentence_embedding(s, table) for s in doc.retained_sentences}
        out.update({k: v for k, v in repetition_postprocess(doc, embs, labels, window, lam).items()
                    if k in embs})
    return out
