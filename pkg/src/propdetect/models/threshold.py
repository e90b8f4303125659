from __future__ import annotations

from dataclasses import dataclass

TAU_GRID = (0.50, 0.40, 0.35)


@dataclass(frozen=True)
class DecisionRule:
    """Tag propaganda when the probability reaches ``tau`` (inclusive)."""
    tau: float = 0.5

    def __post_init__(self):
        if not 0 < self.tau < 1:
            raise ValueError(f"tau must lie in (0, 1), got {self.tau}")

    def __call__(self, probability):
        return probability >= self.tau


def apply_threshold(prediction, rule):
    p = getattr(prediction, "probability", prediction)
    tau = getattr(rule, "tau", rule)
    return p >= tau


def _f1(pred, gold):
    tp = sum(1 for p, g in zip(pred, gold) if p and g)
    fp = sum(1 for p, g in zip(pred, gold) if p and not g)
    fn = sum(1 for p, g in zip(pred, gold) if g and not p)
    return 0.0 if tp == 0 else 2 * tp / (2 * tp + fp + fn)


def select_tau(probabilities, labels, grid=TAU_GRID):
    """Grid value with the best F1 on ``labels``; earlier grid entries win ties."""
    best, best_f1 = None, -1.0
    for tau in grid:
        f1 = _f1([p >= tau for p in probabilities], labels)
        if f1 > best_f1:
            best, best_f1 = tau, f1
    return best, best_f1
