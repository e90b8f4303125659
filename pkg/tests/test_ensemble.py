import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from helpers import doc, frag, reference_majority, reference_merge, reference_relax
from propdetect.corpus import Fragment
from propdetect.errors import CoverageError, DataFormatError
from propdetect.ensemble import (
    EnsembleConfig, build_matrix, ensemble_plus, ingest_fragments, ingest_predictions,
    majority_vote, merge_fragments, read_manifest, relax_vote, repetition_postprocess,
)
from propdetect.features import EmbeddingTable, cosine, sentence_embedding
from propdetect.models import SentencePrediction, write_predictions


def row(*votes):
    return {f"m{i + 1}": v for i, v in enumerate(votes)}


class TestVoting:
    def test_majority_examples(self):
        cfg = EnsembleConfig("majority")
        assert majority_vote(row(True, True, False), cfg) is True
        assert majority_vote(row(False, False, True), cfg) is False

    def test_majority_tie_uses_best_f1(self):
        cfg = EnsembleConfig("majority", model_dev_f1={"m1": 0.66, "m2": 0.61})
        assert majority_vote(row(True, False), cfg) is True
        assert majority_vote(row(False, True), cfg) is False

    def test_majority_tie_f1_tie_uses_smallest_id(self):
        cfg = EnsembleConfig("majority", model_dev_f1={"b": 0.5, "a": 0.5})
        assert majority_vote({"b": True, "a": False}, cfg) is False

    def test_majority_tie_without_f1(self):
        with pytest.raises(KeyError):
            majority_vote(row(True, False), EnsembleConfig("majority"))
        # no tie, so F1 is not needed
        assert majority_vote(row(True), EnsembleConfig("majority")) is True

    def test_relax_examples(self):
        votes = {f"m{i}": i < 5 for i in range(15)}
        assert relax_vote(votes, EnsembleConfig("relax", 0.30)) is True
        assert relax_vote(votes, EnsembleConfig("relax", 0.40)) is False
        for f in (0.2, 0.3, 0.4):
            assert relax_vote(row(False, False, False), EnsembleConfig("relax", f)) is False

    def test_config_validation(self):
        with pytest.raises(ValueError):
            EnsembleConfig("plurality")
        with pytest.raises(ValueError):
            EnsembleConfig("relax", 0.0)

    def test_exhaustive_against_reference(self):
        for M in range(1, 6):
            ids = [f"m{i}" for i in range(M)]
            f1 = {m: [0.6, 0.7, 0.6, 0.5, 0.7][i] for i, m in enumerate(ids)}
            for pattern in itertools.product([False, True], repeat=M):
                votes = list(zip(ids, pattern))
                r = dict(votes)
                assert majority_vote(r, EnsembleConfig("majority", model_dev_f1=f1)) == reference_majority(votes, f1)
                for f in (0.2, 0.3, 0.4):
                    assert relax_vote(r, EnsembleConfig("relax", f)) == reference_relax(votes, f)

    @given(st.lists(st.booleans(), min_size=1, max_size=15), st.floats(0.5001, 1.0))
    def test_relax_above_half_implies_majority(self, votes, f):
        r = row(*votes)
        yes = sum(votes)
        if 2 * yes == len(votes):
            return
        if relax_vote(r, EnsembleConfig("relax", f)):
            assert majority_vote(r, EnsembleConfig("majority"))

    def test_relax_monotone_random_matrices(self):
        rng = np.random.default_rng(0)
        grid = sorted([0.2, 0.3, 0.4, 0.5, 0.75])
        for _ in range(200):
            cells = rng.random((10, int(rng.integers(1, 16)))) < rng.random()
            m = build_matrix({f"c{j}": {("a", i): bool(cells[i, j]) for i in range(10)}
                              for j in range(cells.shape[1])})
            sets = [{k for k, v in m.vote(EnsembleConfig("relax", f)).items() if v} for f in grid]
            assert all(lo >= hi for lo, hi in zip(sets, sets[1:]))


class TestMatrix:
    def test_coverage_gap(self):
        with pytest.raises(CoverageError):
            build_matrix({"a": {("1", 1): True, ("1", 2): False}, "b": {("1", 1): True}})

    def test_explicit_rows(self):
        m = build_matrix({"a": {("1", 1): True, ("1", 2): False}}, rows=[("1", 2)])
        assert m.rows == [("1", 2)] and not m.cells.any()

    def test_write(self, tmp_path):
        m = build_matrix({"a@fold1": {("1", 1): True}, "b@fold1": {("1", 1): False}})
        m.write(tmp_path / "m.tsv")
        assert (tmp_path / "m.tsv").read_text() == "article_id\tsentence_index\ta@fold1\tb@fold1\n1\t1\t1\t0\n"

    @pytest.mark.parametrize("folds,models,width", [(5, 3, 15), (3, 2, 6), (1, 1, 1)])
    def test_ensemble_plus_width(self, folds, models, width):
        keys = [("1", i) for i in range(1, 6)]
        rng = np.random.default_rng(folds)
        per_fold = [{f"m{j}": {k: bool(rng.random() < 0.5) for k in keys} for j in range(models)}
                    for _ in range(folds)]
        matrix, labels = ensemble_plus(per_fold, EnsembleConfig("relax", 0.3))
        assert len(matrix.columns) == width
        assert matrix.columns[0] == "m0@fold1"
        if width == 1:
            assert labels == per_fold[0]["m0"]

    def test_ensemble_plus_roster_mismatch(self):
        keys = {("1", 1): True}
        with pytest.raises(CoverageError):
            ensemble_plus([{"a": keys, "b": keys}, {"a": keys}], EnsembleConfig())


class TestMerge:
    def test_exact_overlap_kept(self):
        out = merge_fragments([[frag(10, 20, "Slogans")], [frag(10, 20, "Slogans")], []], 3)
        assert out == [frag(10, 20, "Slogans")]

    def test_largest_span(self):
        out = merge_fragments([[frag(50, 60, "Doubt")], [frag(50, 70, "Doubt")]])
        assert out == [frag(50, 70, "Doubt")]

    def test_disjoint_kept(self):
        assert merge_fragments([[frag(30, 40, "X")], [frag(0, 10, "Y")]]) == [frag(0, 10, "Y"), frag(30, 40, "X")]

    def test_label_plurality_and_tie(self):
        out = merge_fragments([[frag(0, 5, "A")], [frag(0, 5, "B")], [frag(0, 5, "B")]])
        assert out == [frag(0, 5, "B")]
        out = merge_fragments([[frag(0, 5, "B")], [frag(0, 5, "A")]])
        assert out == [frag(0, 5, "B")]

    def test_different_labels_overlap_kept(self):
        out = merge_fragments([[frag(0, 10, "A")], [frag(5, 15, "B")]])
        assert out == [frag(0, 10, "A"), frag(5, 15, "B")]

    def test_chain(self):
        # b is longest and overlaps both a and c
        out = merge_fragments([[frag(0, 10, "X"), frag(25, 40, "X")], [frag(8, 30, "X")]])
        assert out == [frag(8, 30, "X")]
        # c is longest; b falls, which frees a
        out = merge_fragments([[frag(0, 10, "X"), frag(9, 14, "X")], [frag(13, 40, "X")]])
        assert out == [frag(0, 10, "X"), frag(13, 40, "X")]

    def test_articles_do_not_interact(self):
        out = merge_fragments([[frag(0, 10, "X", "1")], [frag(0, 20, "X", "2")]])
        assert len(out) == 2

    def test_model_count_check(self):
        with pytest.raises(ValueError):
            merge_fragments([[]], model_count=2)

    @settings(max_examples=200, deadline=None)
    @given(st.lists(st.lists(st.tuples(st.integers(0, 30), st.integers(1, 12), st.sampled_from("AB")),
                             max_size=4), min_size=1, max_size=3))
    def test_properties_and_reference(self, raw):
        sets = [[frag(s, s + n, t) for s, n, t in model] for model in raw]
        out = merge_fragments(sets)
        assert out == reference_merge(sets)
        assert merge_fragments([out]) == out
        spans = [(f.start, f.end) for f in out]
        assert len(spans) == len(set(spans))
        for a, b in itertools.combinations(out, 2):
            assert not (a.technique == b.technique and a.overlaps(b))


def _table(vectors):
    return EmbeddingTable(len(next(iter(vectors.values()))),
                          {k: np.asarray(v, float) for k, v in vectors.items()})


class TestPostprocess:
    def _doc_and_embeddings(self, lines, table):
        d = doc("\n".join(lines) + "\n")
        embs = {s.key: sentence_embedding(s, table) for s in d.retained_sentences}
        return d, embs

    def test_duplicate_eight_back(self):
        table = _table({f"w{i}": np.eye(12)[i] for i in range(12)})
        lines = [f"w{i} w{i}" for i in range(10)] + ["w2 w2"]
        d, embs = self._doc_and_embeddings(lines, table)
        labels = {k: False for k in embs}
        out = repetition_postprocess(d, embs, labels, window=10, lam=0.99)
        assert out[("1", 11)] is True
        assert sum(out.values()) == 1

    def test_outside_window(self):
        table = _table({f"w{i}": np.eye(12)[i] for i in range(12)})
        lines = [f"w{i} w{i}" for i in range(10)] + ["w0 w0"]
        d, embs = self._doc_and_embeddings(lines, table)
        out = repetition_postprocess(d, embs, {k: False for k in embs}, window=9, lam=0.99)
        assert not any(out.values())

    def test_orthogonal_unchanged_and_first_never_flips(self):
        table = _table({f"w{i}": np.eye(5)[i] for i in range(5)})
        d, embs = self._doc_and_embeddings([f"w{i} w{i}" for i in range(5)], table)
        labels = {k: (k[1] == 3) for k in embs}
        assert repetition_postprocess(d, embs, labels, 10, 0.5) == labels

    def test_strict_threshold(self):
        d, _ = self._doc_and_embeddings(["a b", "c d"], _table({"a": [1, 0]}))
        embs = {("1", 1): np.array([1.0, 0.0]), ("1", 2): np.array([1.0, 0.0])}
        assert repetition_postprocess(d, embs, {("1", 1): False, ("1", 2): False}, 10, 1.0)[("1", 2)] is False

    def test_skips_filtered_lines(self):
        table = _table({"a": [1, 0], "b": [0, 1]})
        d, embs = self._doc_and_embeddings(["a a", "Ad", "", "b b", "a a"], table)
        out = repetition_postprocess(d, embs, {k: False for k in embs}, window=2, lam=0.9)
        # window of 2 retained predecessors reaches across the two filtered lines
        assert out[("1", 5)] is True

    @settings(max_examples=50, deadline=None)
    @given(st.lists(st.lists(st.floats(-1, 1), min_size=3, max_size=3), min_size=1, max_size=12),
           st.integers(1, 10), st.floats(0.5, 0.99), st.floats(0.5, 0.99))
    def test_monotone(self, vecs, window, l1, l2):
        d = doc("\n".join("x y" for _ in vecs) + "\n")
        embs = {s.key: np.array(v) for s, v in zip(d.retained_sentences, vecs)}
        base = {k: bool(i % 3 == 0) for i, k in enumerate(embs)}
        lo, hi = sorted((l1, l2))
        a = repetition_postprocess(d, embs, base, window, hi)
        b = repetition_postprocess(d, embs, base, window, lo)
        assert {k for k, v in base.items() if v} <= {k for k, v in a.items() if v} <= {k for k, v in b.items() if v}
        keys = list(embs)
        for i, k in enumerate(keys):
            prev = keys[max(0, i - window):i]
            expect = base[k] or (bool(prev) and max(cosine(embs[k], embs[p]) for p in prev) > hi)
            assert a[k] == expect


class TestManifest:
    @pytest.fixture
    def corpus(self, tmp_path):
        (tmp_path / "art").mkdir()
        (tmp_path / "art" / "article1.txt").write_text("Title words\none two\nthree four\n")
        from propdetect.corpus import load_articles
        return tmp_path, load_articles(tmp_path / "art")

    def _write(self, root, name, probs, model):
        write_predictions(root / name, [SentencePrediction("1", i, p, model) for i, p in probs])

    def test_three_columns(self, corpus):
        root, docs = corpus
        for m in ("cnn", "bert", "lr"):
            self._write(root, f"{m}.tsv", [(1, 0.1), (2, 0.9), (3, 0.4)], m)
        (root / "man.txt").write_text("task = slc\nmode = majority\n" + "".join(
            f"source = {m} 1 0.6 {m}.tsv\n" for m in ("cnn", "bert", "lr")))
        store = ingest_predictions(read_manifest(root / "man.txt"), docs)
        assert sorted(store) == ["bert@fold1", "cnn@fold1", "lr@fold1"]

    def test_bad_probability_names_row(self, corpus):
        root, docs = corpus
        (root / "p.tsv").write_text("1\t1\t0.5\tm\n1\t2\t1.2\tm\n")
        (root / "man.txt").write_text("source = m 1 0.5 p.tsv\n")
        with pytest.raises(DataFormatError, match=r"p\.tsv:2"):
            ingest_predictions(root / "man.txt", docs)

    def test_duplicate_row(self, corpus):
        root, docs = corpus
        (root / "p.tsv").write_text("1\t1\t0.5\tm\n1\t1\t0.5\tm\n")
        (root / "man.txt").write_text("source = m 1 0.5 p.tsv\n")
        with pytest.raises(DataFormatError):
            ingest_predictions(root / "man.txt", docs)

    def test_coverage_gap(self, corpus):
        root, docs = corpus
        self._write(root, "p.tsv", [(1, 0.5), (2, 0.5)], "m")
        (root / "man.txt").write_text("source = m 1 0.5 p.tsv\n")
        with pytest.raises(CoverageError):
            ingest_predictions(root / "man.txt", docs)

    def test_bad_manifest_lines(self, tmp_path):
        for body in ("task = xyz\n", "bogus = 1\n", "source = a b c\n", "no equals\n",
                     "source = a 1 0.5 x\nsource = a 1 0.6 y\n"):
            (tmp_path / "m.txt").write_text(body)
            with pytest.raises(DataFormatError):
                read_manifest(tmp_path / "m.txt")

    def test_fragments(self, corpus):
        root, docs = corpus
        (root / "f.tsv").write_text("1\tX\t0\t5\tcrf\n")
        (root / "man.txt").write_text("task = flc\nsource = crf 2 0.3 f.tsv\n")
        assert ingest_fragments(root / "man.txt", docs) == {"crf@fold2": [Fragment("1", 0, 5, "X")]}
