import itertools
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import frag
from propdetect.evaluation import (
    BinaryScore, SpanScoreReport, flc_strict_scores, format_table, format_tsv, report_rows,
    score_folds, slc_scores,
)


def labels(*bits):
    return {("1", i + 1): bool(b) for i, b in enumerate(bits)}


# (predicted, gold, tp, fp, fn, precision, recall, f1) with fractions computed by hand
SLC_GOLDEN = [
    ((1, 1, 1, 0), (1, 1, 0, 1), 2, 1, 1, "2/3", "2/3", "2/3"),
    ((1, 0, 1), (1, 0, 1), 2, 0, 0, "1", "1", "1"),
    ((0, 0, 0), (1, 0, 1), 0, 0, 2, "0", "0", "0"),
    ((1, 1), (0, 0), 0, 2, 0, "0", "0", "0"),
    ((0, 0), (0, 0), 0, 0, 0, "0", "0", "0"),
    ((1, 1, 1, 1), (1, 0, 0, 0), 1, 3, 0, "1/4", "1", "2/5"),
    ((1, 0, 0, 0), (1, 1, 1, 0), 1, 0, 2, "1", "1/3", "1/2"),
]


@pytest.mark.parametrize("pred,gold,tp,fp,fn,p,r,f", SLC_GOLDEN)
def test_slc_golden(pred, gold, tp, fp, fn, p, r, f):
    s = slc_scores(labels(*pred), labels(*gold))
    assert (s.tp, s.fp, s.fn) == (tp, fp, fn)
    assert s.precision == pytest.approx(float(Fraction(p)), abs=1e-15)
    assert s.recall == pytest.approx(float(Fraction(r)), abs=1e-15)
    assert s.f1 == pytest.approx(float(Fraction(f)), abs=1e-15)


def test_slc_missing_prediction():
    with pytest.raises(KeyError):
        slc_scores(labels(1), labels(1, 0))


def test_slc_extra_predictions_ignored():
    assert slc_scores(labels(1, 1, 1), labels(1, 0)) == BinaryScore(1, 1, 0)


A, B = "A", "B"

FLC_GOLDEN = [
    # strict-match definition: off-by-one end is a miss
    ([frag(0, 5, A), frag(10, 14, B)], [frag(0, 5, A), frag(10, 15, B)],
     {A: (1, 0, 0), B: (0, 1, 1)}, 0.5),
    ([frag(0, 5, A)], [frag(0, 5, A)], {A: (1, 0, 0)}, 1.0),
    # one-to-one matching
    ([frag(0, 5, A), frag(0, 5, A)], [frag(0, 5, A)], {A: (1, 1, 0)}, 2 / 3),
    ([frag(0, 5, A)], [frag(0, 5, A), frag(0, 5, A)], {A: (1, 0, 1)}, 2 / 3),
    # label must match
    ([frag(0, 5, B)], [frag(0, 5, A)], {A: (0, 0, 1), B: (0, 1, 0)}, 0.0),
    # article must match
    ([frag(0, 5, A, "2")], [frag(0, 5, A, "1")], {A: (0, 1, 1)}, 0.0),
    ([], [], {}, 0.0),
    ([], [frag(0, 5, A)], {A: (0, 0, 1)}, 0.0),
    # hallucinated technique drags macro down
    ([frag(0, 5, A), frag(7, 9, B)], [frag(0, 5, A)], {A: (1, 0, 0), B: (0, 1, 0)}, 0.5),
]


@pytest.mark.parametrize("pred,gold,counts,macro", FLC_GOLDEN)
def test_flc_golden(pred, gold, counts, macro):
    rep = flc_strict_scores(pred, gold)
    assert {t: (s.tp, s.fp, s.fn) for t, s in rep.per_technique.items()} == counts
    assert rep.macro_f1 == pytest.approx(macro, abs=1e-15)


def test_micro_pools_counts():
    rep = flc_strict_scores(FLC_GOLDEN[0][0], FLC_GOLDEN[0][1])
    assert rep.micro == BinaryScore(1, 1, 1)
    assert rep.micro.f1 == pytest.approx(0.5)


def test_score_folds():
    one = score_folds([BinaryScore(2, 1, 1)])
    assert one.pooled == BinaryScore(2, 1, 1) and one.mean_f1 == pytest.approx(2 / 3)
    same = score_folds([BinaryScore(2, 1, 1)] * 2)
    assert same.pooled.f1 == pytest.approx(2 / 3) and same.mean_f1 == pytest.approx(2 / 3)
    # asymmetric folds: mean of fold F1s is (1 + 0) / 2, pooled counts give 2*10/(20+1)
    rep = score_folds([BinaryScore(10, 0, 0), BinaryScore(0, 1, 0)])
    assert rep.mean_f1 == pytest.approx(0.5)
    assert rep.pooled.f1 == pytest.approx(20 / 21)
    with pytest.raises(ValueError):
        score_folds([])


def test_score_folds_spans():
    r1 = flc_strict_scores([frag(0, 5, A)], [frag(0, 5, A)])
    r2 = flc_strict_scores([frag(0, 5, B)], [frag(0, 6, B)])
    rep = score_folds([r1, r2])
    assert rep.mean_f1 == pytest.approx(0.5)
    assert rep.pooled.macro_f1 == pytest.approx(0.5)
    assert rep.pooled.per_technique[B] == BinaryScore(0, 1, 1)


def test_report_formats():
    rows = report_rows(BinaryScore(2, 1, 1))
    assert ("tp", "propaganda", 2) in rows
    tsv = format_tsv(rows)
    assert tsv.splitlines()[0].split("\t")[:2] == ["precision", "propaganda"]
    assert "tp\tpropaganda\t2" in tsv
    rep = flc_strict_scores(FLC_GOLDEN[0][0], FLC_GOLDEN[0][1])
    assert format_tsv(report_rows(rep)).startswith("macro_f1\t*\t0.5")
    table = format_table(rep)
    assert "macro F1" in table and "micro" in table


def _brute_force_matches(pred, gold):
    """Maximum matching over exact-equality edges by exhaustive search."""
    best = 0
    for r in range(min(len(pred), len(gold)), 0, -1):
        for ps in itertools.combinations(range(len(pred)), r):
            for gs in itertools.permutations(range(len(gold)), r):
                if all(pred[i] == gold[j] for i, j in zip(ps, gs)):
                    return r
    return best


frag_strategy = st.builds(lambda s, n, t, a: frag(s, s + n, t, a),
                          st.integers(0, 3), st.integers(1, 2), st.sampled_from("AB"), st.sampled_from("12"))


@settings(max_examples=150, deadline=None)
@given(st.lists(frag_strategy, max_size=5), st.lists(frag_strategy, max_size=5))
def test_matching_is_maximum(pred, gold):
    rep = flc_strict_scores(pred, gold)
    assert rep.micro.tp == _brute_force_matches(pred, gold)
    assert rep.micro.tp + rep.micro.fp == len(pred)
    assert rep.micro.tp + rep.micro.fn == len(gold)


@settings(max_examples=100, deadline=None)
@given(st.lists(frag_strategy, max_size=20))
def test_self_score_perfect(frags):
    rep = flc_strict_scores(frags, frags)
    assert all(s.f1 == 1.0 for s in rep.per_technique.values())
    if frags:
        assert rep.macro_f1 == 1.0 and rep.micro.f1 == 1.0


@settings(max_examples=100, deadline=None)
@given(st.lists(frag_strategy, max_size=10), st.lists(frag_strategy, min_size=1, max_size=10), st.data())
def test_removing_a_correct_prediction_never_helps(pred, gold, data):
    # distinct fragments, so every prediction found in gold is a true positive
    gold = sorted(set(gold))
    pred = sorted(set(pred) | {data.draw(st.sampled_from(gold))})
    before = flc_strict_scores(pred, gold)
    matched = [p for p in pred if p in gold]
    drop = data.draw(st.sampled_from(matched))
    rest = list(pred)
    rest.remove(drop)
    after = flc_strict_scores(rest, gold)
    for t, s in after.per_technique.items():
        assert s.f1 <= before.per_technique[t].f1 + 1e-12


def test_report_add_merges_techniques():
    r = SpanScoreReport({"B": BinaryScore(1, 0, 0)}) + SpanScoreReport({"A": BinaryScore(0, 1, 0)})
    assert list(r.per_technique) == ["A", "B"]
