"""Hard-label voting over per-model sentence predictions."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import CoverageError

MODES = ("majority", "relax")
RELAX_GRID = (0.2, 0.3, 0.4)


@dataclass
class EnsembleConfig:
    mode: str = "relax"
    relax_fraction: float = 0.3
    model_dev_f1: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        if self.mode not in MODES:
            raise ValueError(f"unknown ensemble mode {self.mode!r}")
        if not 0 < self.relax_fraction <= 1:
            raise ValueError("relax_fraction must lie in (0, 1]")


def majority_vote(row, config):
    """Strict majority; an exact tie defers to the model with the best dev F1.

    ``row`` maps model id to its boolean vote.  F1 ties go to the
    lexicographically smallest model id.
    """
    if not row:
        raise ValueError("no votes")
    yes = sum(1 for v in row.values() if v)
    no = len(row) - yes
    if yes != no:
        return yes > no
    missing = [m for m in row if m not in config.model_dev_f1]
    if missing:
        raise KeyError(f"no dev F1 for {sorted(missing)} to break a tie")
    best = min(row, key=lambda m: (-config.model_dev_f1[m], m))
    return bool(row[best])


def relax_vote(row, config):
    if not row:
        raise ValueError("no votes")
    yes = sum(1 for v in row.values() if v)
    return yes / len(row) >= config.relax_fraction


def vote(row, config):
    return majority_vote(row, config) if config.mode == "majority" else relax_vote(row, config)


@dataclass
class PredictionMatrix:
    rows: list[tuple[str, int]]
    columns: list[str]
    cells: np.ndarray

    def __post_init__(self):
        self.cells = np.asarray(self.cells, dtype=bool).reshape(len(self.rows), len(self.columns))

    def row(self, i):
        return dict(zip(self.columns, self.cells[i].tolist()))

    def vote(self, config):
        return {key: vote(self.row(i), config) for i, key in enumerate(self.rows)}

    def write(self, path):
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("article_id\tsentence_index\t" + "\t".join(self.columns) + "\n")
            for key, cells in zip(self.rows, self.cells):
                fh.write(f"{key[0]}\t{key[1]}\t" + "\t".join(str(int(c)) for c in cells) + "\n")


def build_matrix(columns, rows=None):
    """Assemble ``{column_id: {sentence_key: bool}}`` into a rectangular matrix.

    ``rows`` defaults to the union of all keys; a column missing any row
    raises :class:`CoverageError`.
    """
    col_ids = list(columns)
    if rows is None:
        rows = sorted({k for c in columns.values() for k in c})
    else:
        rows = list(rows)
    cells = np.zeros((len(rows), len(col_ids)), dtype=bool)
    for j, cid in enumerate(col_ids):
        col = columns[cid]
        gaps = [k for k in rows if k not in col]
        if gaps:
            raise CoverageError(f"column {cid!r} lacks {len(gaps)} sentence(s), e.g. {gaps[:3]}")
        cells[:, j] = [bool(col[k]) for k in rows]
    return PredictionMatrix(rows, col_ids, cells)


def column_id(model_id, fold):
    return f"{model_id}@fold{fold}"


def ensemble_plus(per_fold, config, rows=None):
    """Pool the same model roster from every fold into one voting ensemble.

    ``per_fold`` is a sequence (fold 1 first) of ``{model_id: {key: bool}}``.
    Returns ``(matrix, labels)``.
    """
    if not per_fold:
        raise ValueError("no folds")
    roster = sorted(per_fold[0])
    columns = {}
    for i, fold in enumerate(per_fold, start=1):
        if sorted(fold) != roster:
            raise CoverageError(f"fold {i} roster {sorted(fold)} differs from {roster}")
        for m in roster:
            columns[column_id(m, i)] = fold[m]
    matrix = build_matrix(columns, rows)
    return matrix, matrix.vote(config)
