"""Binary sentence scores and strict-boundary fragment scores."""
from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field

from .utils import fmt_float


@dataclass(frozen=True)
class BinaryScore:
    tp: int = 0
    fp: int = 0
    fn: int = 0

    @property
    def precision(self):
        return self.tp / (self.tp + self.fp) if self.tp + self.fp else 0.0

    @property
    def recall(self):
        return self.tp / (self.tp + self.fn) if self.tp + self.fn else 0.0

    @property
    def f1(self):
        p, r = self.precision, self.recall
        return 2 * p * r / (p + r) if p + r else 0.0

    def __add__(self, other):
        return BinaryScore(self.tp + other.tp, self.fp + other.fp, self.fn + other.fn)


@dataclass
class SpanScoreReport:
    per_technique: dict[str, BinaryScore] = field(default_factory=dict)

    @property
    def micro(self):
        return sum(self.per_technique.values(), BinaryScore())

    @property
    def macro_f1(self):
        if not self.per_technique:
            return 0.0
        return sum(s.f1 for s in self.per_technique.values()) / len(self.per_technique)

    def __add__(self, other):
        out = dict(self.per_technique)
        for t, s in other.per_technique.items():
            out[t] = out.get(t, BinaryScore()) + s
        return SpanScoreReport(dict(sorted(out.items())))


def slc_scores(predicted, gold):
    """Score ``{key: bool}`` predictions against gold, propaganda positive.

    Predictions for keys absent from gold are ignored.
    """
    missing = [k for k in gold if k not in predicted]
    if missing:
        raise KeyError(f"no prediction for {len(missing)} gold sentence(s), e.g. {sorted(missing)[:3]}")
    tp = fp = fn = 0
    for k, g in gold.items():
        p = bool(predicted[k])
        tp += p and g
        fp += p and not g
        fn += g and not p
    return BinaryScore(tp, fp, fn)


def flc_strict_scores(predicted, gold):
    """Exact ``(article, start, end, technique)`` matching, one-to-one and greedy."""
    pool = defaultdict(int)
    for g in gold:
        pool[(g.article_id, g.start, g.end, g.technique)] += 1
    tp = defaultdict(int)
    fp = defaultdict(int)
    for p in predicted:
        key = (p.article_id, p.start, p.end, p.technique)
        if pool[key] > 0:
            pool[key] -= 1
            tp[p.technique] += 1
        else:
            fp[p.technique] += 1
    fn = defaultdict(int)
    for (_, _, _, t), n in pool.items():
        fn[t] += n
    techniques = sorted({f.technique for f in gold} | {f.technique for f in predicted})
    return SpanScoreReport({t: BinaryScore(tp[t], fp[t], fn[t]) for t in techniques})


@dataclass
class FoldReport:
    per_fold: list
    pooled: object

    @property
    def mean_f1(self):
        vals = [_headline(s) for s in self.per_fold]
        return sum(vals) / len(vals)


def _headline(score):
    return score.macro_f1 if isinstance(score, SpanScoreReport) else score.f1


def score_folds(per_fold_scores):
    """Per-fold scores plus the score from counts pooled over all folds."""
    scores = list(per_fold_scores)
    if not scores:
        raise ValueError("no folds to aggregate")
    pooled = scores[0]
    for s in scores[1:]:
        pooled = pooled + s
    return FoldReport(scores, pooled)


# -- reporting ---------------------------------------------------------

def report_rows(score, prefix=""):
    """``(metric, technique, value)`` rows for a score object."""
    rows = []
    if isinstance(score, SpanScoreReport):
        rows.append((f"{prefix}macro_f1", "*", score.macro_f1))
        m = score.micro
        rows += [(f"{prefix}micro_{k}", "*", getattr(m, k)) for k in ("precision", "recall", "f1")]
        for t, s in score.per_technique.items():
            rows += [(f"{prefix}{k}", t, getattr(s, k)) for k in ("precision", "recall", "f1", "tp", "fp", "fn")]
    else:
        rows += [(f"{prefix}{k}", "propaganda", getattr(score, k))
                 for k in ("precision", "recall", "f1", "tp", "fp", "fn")]
    return rows


def format_tsv(rows):
    out = []
    for metric, technique, value in rows:
        v = str(value) if isinstance(value, int) else fmt_float(value)
        out.append(f"{metric}\t{technique}\t{v}")
    return "\n".join(out) + "\n"


def format_table(score, title="strict-boundary scores"):
    lines = [title]
    if isinstance(score, SpanScoreReport):
        width = max([len(t) for t in score.per_technique] + [9])
        lines.append(f"{'technique':<{width}}  {'P':>6} {'R':>6} {'F1':>6} {'tp':>5} {'fp':>5} {'fn':>5}")
        for t, s in score.per_technique.items():
            lines.append(f"{t:<{width}}  {s.precision:6.3f} {s.recall:6.3f} {s.f1:6.3f} {s.tp:5d} {s.fp:5d} {s.fn:5d}")
        m = score.micro
        lines.append(f"{'micro':<{width}}  {m.precision:6.3f} {m.recall:6.3f} {m.f1:6.3f} {m.tp:5d} {m.fp:5d} {m.fn:5d}")
        lines.append(f"{'macro F1':<{width}}  {score.macro_f1:6.3f}")
    else:
        lines.append(f"P={score.precision:.4f} R={score.recall:.4f} F1={score.f1:.4f} "
                     f"(tp={score.tp} fp={score.fp} fn={score.fn})")
    return "\n".join(lines) + "\n"
