from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from ..errors import DataFormatError


@dataclass
class EmbeddingTable:
    dimension: int
    vectors: dict[str, np.ndarray]

    def __post_init__(self):
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        for tok, v in self.vectors.items():
            if v.shape != (self.dimension,) or not np.all(np.isfinite(v)):
                raise ValueError(f"bad vector for {tok!r}")

    def __contains__(self, token):
        return token in self.vectors

    def lookup(self, token):
        """Exact match first, then the lowercased form; ``None`` when OOV."""
        v = self.vectors.get(token)
        if v is None:
            v = self.vectors.get(token.lower())
        return v


def load_word_vectors(path):
    """Read a word2vec/fastText text file.

    An optional ``<count> <dim>`` header is honoured; otherwise the dimension
    is taken from the first row.  Later rows for the same token win.
    """
    path = Path(path)
    dim = None
    vectors = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.rstrip("\n\r").split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2 and all(p.isdigit() for p in parts):
                dim = int(parts[1])
                continue
            tok, vals = parts[0], parts[1:]
            if dim is None:
                dim = len(vals)
            if len(vals) != dim:
                raise DataFormatError(f"expected {dim} components, got {len(vals)}", path, lineno)
            try:
                vec = np.array([float(x) for x in vals])
            except ValueError as e:
                raise DataFormatError(f"non-numeric component: {e}", path, lineno) from None
            if not np.all(np.isfinite(vec)):
                raise DataFormatError("non-finite component", path, lineno)
            vectors[tok] = vec
    if dim is None or dim < 1:
        raise DataFormatError("no vectors found", path)
    return EmbeddingTable(dim, vectors)


def sentence_embedding(sentence, table):
    tokens = sentence.tokens if hasattr(sentence, "tokens") else sentence
    out = np.zeros(table.dimension)
    for tok in tokens:
        v = table.lookup(tok if isinstance(tok, str) else tok.text)
        if v is not None:
            out += v
    return out


def cosine(u, v):
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu, nv = np.linalg.norm(u), np.linalg.norm(v)
    if nu == 0 or nv == 0:
        return 0.0
    return float(np.clip(u @ v / (nu * nv), -1.0, 1.0))
