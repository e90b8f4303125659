"""End-to-end fold experiments for both tasks.

Every stage writes plain files (models, prediction TSVs, vote matrices,
reports) under the output directory, so any step can be replayed from
disk.  Outputs depend only on the configuration and its seed.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .corpus import (
    decode_bio,
    encode_bio,
    load_articles,
    load_flc_labels,
    load_slc_labels,
    make_folds,
    slc_gold_from_fragments,
    tag_set,
    technique_vocabulary,
    write_fragments,
    write_slc_labels,
)
from .ensemble import (
    EnsembleConfig,
    column_id,
    ensemble_plus,
    ingest_fragments,
    ingest_predictions,
    merge_fragments,
    postprocess_corpus,
    read_manifest,
    threshold_column,
)
from .errors import DataFormatError
from .evaluation import (
    flc_strict_scores,
    format_table,
    format_tsv,
    report_rows,
    score_folds,
    slc_scores,
)
from .features import SentenceFeaturizer, load_annotations, load_lexicons, load_word_vectors, tag_documents
from .models import (
    LinearChainCRF,
    LogisticRegressionGD,
    LogRegModel,
    SentencePrediction,
    select_tau,
    sentence_token_features,
    write_predictions,
)

logger = logging.getLogger(__name__)

NATIVE_SLC_MODEL = "logreg"


@dataclass
class Resources:
    documents: dict
    lexicons: object
    embeddings: object = None
    eval_documents: dict | None = None


@dataclass
class RunResult:
    output_dir: Path
    labels: dict = field(default_factory=dict)
    fragments: list = field(default_factory=list)
    fold_report: object = None
    final_score: object = None
    n_columns: int = 0


def load_corpus(corpus_dir, annotations=None, fallback=True):
    docs = load_articles(corpus_dir)
    if annotations is not None:
        load_annotations(annotations, docs)
    if fallback:
        tag_documents(docs)
    return docs


def load_resources(config):
    docs = load_corpus(config.corpus_dir, config.annotations, config.fallback_tagger)
    lex = load_lexicons(config.sentiment_lexicon, config.emotion_lexicon,
                        config.loaded_lexicon, config.sense_lexicon)
    table = load_word_vectors(config.embeddings) if config.embeddings else None
    eval_docs = None
    if config.eval_dir is not None:
        eval_docs = load_corpus(config.eval_dir, config.eval_annotations, config.fallback_tagger)
        clash = set(docs) & set(eval_docs)
        if clash:
            raise DataFormatError(f"evaluation articles overlap the training corpus: {sorted(clash)[:3]}")
    return Resources(docs, lex, table, eval_docs)


def _pairs(documents, ids=None):
    ids = sorted(documents) if ids is None else ids
    return [(documents[a], s) for a in ids for s in documents[a].retained_sentences]


def make_featurizer(config, resources, lda=None):
    toggles = tuple(g for g in config.features if g != "embedding" or resources.embeddings is not None)
    if "embedding" in config.features and resources.embeddings is None:
        logger.warning("no embedding table configured; dropping the embedding block")
    return SentenceFeaturizer(resources.lexicons, resources.embeddings, toggles,
                              n_topics=config.lda_topics, lda_iter=config.lda_iterations,
                              lda_infer_iter=config.lda_infer_iterations,
                              random_state=config.seed, lda=lda)


def _write_report(out, name, rows, table):
    (out / f"{name}.tsv").write_text(format_tsv(rows), encoding="utf-8")
    (out / f"{name}.txt").write_text(table, encoding="utf-8")


def _manifest_by_fold(manifest, k, task):
    if manifest.task != task:
        raise DataFormatError(f"manifest task is {manifest.task!r}, expected {task!r}")
    by_fold = {}
    for s in manifest.sources:
        if not 1 <= s.fold <= k:
            raise DataFormatError(f"source {s.column}: fold {s.fold} outside 1..{k}")
        by_fold.setdefault(s.fold, []).append(s)
    return by_fold


# ----------------------------------------------------------------------------
# SLC

def run_slc(config, output_dir):
    config.validate(require=("corpus_dir",))
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(config.to_text(), encoding="utf-8")
    res = load_resources(config)
    docs = res.documents
    if config.slc_labels is not None:
        gold = load_slc_labels(config.slc_labels, docs)
    elif config.flc_labels is not None:
        load_flc_labels(config.flc_labels, docs)
        gold = slc_gold_from_fragments(docs)
    else:
        raise DataFormatError("run-slc needs slc_labels or flc_labels")

    pairs = [p for p in _pairs(docs) if p[1].key in gold]
    featurizer = make_featurizer(config, res).fit(pairs)
    if featurizer.lda_ is not None:
        featurizer.lda_.save(out / "lda.model")
    X_all = featurizer.transform(pairs)
    keys = [s.key for _, s in pairs]
    row_of = {k: i for i, k in enumerate(keys)}
    y_all = np.array([int(gold[k]) for k in keys])

    eval_pairs = _pairs(res.eval_documents) if res.eval_documents is not None else []
    X_eval = featurizer.transform(eval_pairs) if eval_pairs else None
    eval_keys = [s.key for _, s in eval_pairs]

    plan = make_folds(docs, config.slc_folds, config.seed)
    fold_scores, oof_labels, native_cols, native_f1 = [], {}, [], {}
    for i in range(config.slc_folds):
        fold = i + 1
        fdir = out / f"fold{fold}"
        fdir.mkdir(exist_ok=True)
        train_ids, test_ids = plan.split(i)
        tr = [row_of[s.key] for _, s in _pairs(docs, train_ids) if s.key in row_of]
        te = [row_of[s.key] for _, s in _pairs(docs, test_ids) if s.key in row_of]
        est = LogisticRegressionGD(l2=config.logreg_l2, epochs=config.logreg_epochs,
                                   learning_rate=config.logreg_learning_rate,
                                   random_state=config.seed).fit(X_all[tr], y_all[tr])
        p_dev = est.predict_proba(X_all[te])[:, 1]
        tau, _ = select_tau(p_dev, y_all[te].astype(bool), config.tau_grid)
        model = LogRegModel(est.coef_, est.intercept_, config.logreg_l2, featurizer.schema_id_,
                            tuple(featurizer.feature_names_), tau)
        model.save(fdir / "logreg.model")
        write_predictions(fdir / "dev_predictions.tsv", [
            SentencePrediction(keys[r][0], keys[r][1], float(p), NATIVE_SLC_MODEL)
            for r, p in zip(te, p_dev)])
        dev_labels = {keys[r]: bool(p >= tau) for r, p in zip(te, p_dev)}
        score = slc_scores(dev_labels, {keys[r]: bool(y_all[r]) for r in te})
        fold_scores.append(score)
        oof_labels.update(dev_labels)
        native_f1[column_id(NATIVE_SLC_MODEL, fold)] = score.f1
        _write_report(fdir, "dev_report", report_rows(score),
                      format_table(score, f"fold {fold} dev (internal), tau={tau}"))
        if X_eval is not None:
            p_eval = est.predict_proba(X_eval)[:, 1]
            write_predictions(fdir / "eval_predictions.tsv", [
                SentencePrediction(k[0], k[1], float(p), NATIVE_SLC_MODEL)
                for k, p in zip(eval_keys, p_eval)])
            native_cols.append({k: bool(p >= tau) for k, p in zip(eval_keys, p_eval)})

    fold_report = score_folds(fold_scores)
    rows = report_rows(fold_report.pooled, "pooled_")
    for n, s in enumerate(fold_report.per_fold, start=1):
        rows += report_rows(s, f"fold{n}_")
    _write_report(out, "folds_report", rows,
                  format_table(fold_report.pooled, "dev (internal), pooled over folds"))

    result = RunResult(out, fold_report=fold_report)
    if res.eval_documents is not None:
        per_fold = [{NATIVE_SLC_MODEL: col} for col in native_cols]
        f1 = dict(native_f1)
        if config.manifest is not None:
            manifest = read_manifest(config.manifest)
            by_fold = _manifest_by_fold(manifest, config.slc_folds, "slc")
            store = ingest_predictions(manifest, res.eval_documents)
            for fold, sources in by_fold.items():
                for s in sources:
                    tau = s.tau if s.tau is not None else manifest.tau
                    per_fold[fold - 1][s.model_id] = threshold_column(store[s.column], tau)
                    f1[s.column] = s.dev_f1
        ens = EnsembleConfig(config.ensemble_mode, config.relax_fraction, f1)
        matrix, labels = ensemble_plus(per_fold, ens, rows=eval_keys)
        matrix.write(out / "ensemble_matrix.tsv")
        result.n_columns = len(matrix.columns)
        target_docs = res.eval_documents
    else:
        labels = oof_labels
        target_docs = docs
        result.n_columns = 1

    if config.postprocess:
        if res.embeddings is None:
            raise DataFormatError("postprocess needs an embedding table")
        labels = postprocess_corpus(target_docs, res.embeddings, labels, config.window, config.lambda_)
    write_slc_labels(out / "predictions.tsv", labels)
    result.labels = labels

    target_gold = None
    if res.eval_documents is None:
        target_gold = gold
    elif config.eval_slc_labels is not None:
        target_gold = load_slc_labels(config.eval_slc_labels, res.eval_documents)
    elif config.eval_flc_labels is not None:
        load_flc_labels(config.eval_flc_labels, res.eval_documents)
        target_gold = slc_gold_from_fragments(res.eval_documents)
    if target_gold is not None:
        result.final_score = slc_scores(labels, target_gold)
        title = "dev (external)" if res.eval_documents is not None else "out-of-fold"
        _write_report(out, "report", report_rows(result.final_score),
                      format_table(result.final_score, f"SLC {title}, binary F1"))
    return result


# ----------------------------------------------------------------------------
# FLC

def _sentence_sequences(documents, ids, lexicons, groups):
    sents = [s for a in ids for s in documents[a].retained_sentences]
    return sents, [sentence_token_features(s, lexicons, groups) for s in sents]


def _decode(crf, documents, ids, lexicons, groups):
    sents, X = _sentence_sequences(documents, ids, lexicons, groups)
    frags = []
    for s, feats in zip(sents, X):
        frags += decode_bio(crf.viterbi(feats), s)
    return frags


def run_flc(config, output_dir):
    config.validate(require=("corpus_dir", "flc_labels"))
    out = Path(output_dir)
    out.mkdir(parents=True, exist_ok=True)
    (out / "config.txt").write_text(config.to_text(), encoding="utf-8")
    res = load_resources(config)
    docs = res.documents
    gold = load_flc_labels(config.flc_labels, docs)
    tags = tag_set(technique_vocabulary(gold))
    lex = res.lexicons

    plan = make_folds(docs, config.flc_folds, config.seed)
    fold_scores, oof, sources = [], [], {}
    for i in range(config.flc_folds):
        fold = i + 1
        fdir = out / f"fold{fold}"
        fdir.mkdir(exist_ok=True)
        train_ids, test_ids = plan.split(i)
        dev_sets = []
        for name, groups in config.flc_variants:
            sents, X = _sentence_sequences(docs, train_ids, lex, groups)
            y = [encode_bio(s, docs[s.article_id].fragments).tags for s in sents]
            crf = LinearChainCRF(l2=config.crf_l2, epochs=config.crf_epochs,
                                 learning_rate=config.crf_learning_rate, tags=tags,
                                 random_state=config.seed).fit(X, y)
            crf.save(fdir / f"crf_{name}.model")
            dev = _decode(crf, docs, test_ids, lex, groups)
            write_fragments(fdir / f"dev_{name}.tsv", dev, model_id=name)
            dev_sets.append(dev)
            if res.eval_documents is not None:
                ev = _decode(crf, res.eval_documents, sorted(res.eval_documents), lex, groups)
                write_fragments(fdir / f"eval_{name}.tsv", ev, model_id=name)
                sources[column_id(name, fold)] = ev
        merged = merge_fragments(dev_sets, len(dev_sets))
        write_fragments(fdir / "dev_merged.tsv", merged)
        fold_gold = [f for f in gold if f.article_id in set(test_ids)]
        score = flc_strict_scores(merged, fold_gold)
        fold_scores.append(score)
        oof += merged
        _write_report(fdir, "dev_report", report_rows(score),
                      format_table(score, f"fold {fold} dev (internal), strict boundaries"))

    fold_report = score_folds(fold_scores)
    rows = report_rows(fold_report.pooled, "pooled_")
    for n, s in enumerate(fold_report.per_fold, start=1):
        rows += report_rows(s, f"fold{n}_")
    _write_report(out, "folds_report", rows,
                  format_table(fold_report.pooled, "dev (internal), pooled over folds, strict boundaries"))
    result = RunResult(out, fold_report=fold_report)

    if res.eval_documents is not None:
        if config.manifest is not None:
            manifest = read_manifest(config.manifest)
            _manifest_by_fold(manifest, config.flc_folds, "flc")
            sources.update(ingest_fragments(manifest, res.eval_documents))
        order = sorted(sources)
        with open(out / "merge_sources.tsv", "w", encoding="utf-8", newline="\n") as fh:
            for cid in order:
                fh.write(f"{cid}\t{len(sources[cid])}\n")
        final = merge_fragments([sources[c] for c in order], len(order))
        result.n_columns = len(order)
        target_gold = (load_flc_labels(config.eval_flc_labels, res.eval_documents)
                       if config.eval_flc_labels is not None else None)
    else:
        final = sorted(oof)
        result.n_columns = len(config.flc_variants)
        target_gold = gold
    write_fragments(out / "predictions.tsv", final)
    result.fragments = final
    if target_gold is not None:
        result.final_score = flc_strict_scores(final, target_gold)
        title = "dev (external)" if res.eval_documents is not None else "out-of-fold"
        _write_report(out, "report", report_rows(result.final_score),
                      format_table(result.final_score, f"FLC {title}, strict boundaries"))
    return result
