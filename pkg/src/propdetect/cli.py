"""Command line interface.

Exit codes: 0 success, 1 usage error, 2 data or format error, 3 internal
invariant failure.
"""
from __future__ import annotations

import dataclasses
import functools
import logging
import sys
from pathlib import Path

import click

from .config import PipelineConfig, read_config
from .errors import CoverageError, DataFormatError, InvariantError, SchemaMismatchError

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 1, 2, 3

_CONFIG_FLAGS = [
    ("--corpus-dir", "corpus_dir", "Directory of article<ID>.txt files."),
    ("--slc-labels", "slc_labels", "SLC gold TSV."),
    ("--flc-labels", "flc_labels", "FLC gold TSV."),
    ("--eval-dir", "eval_dir", "Extra labelled articles used as the ensemble target."),
    ("--eval-slc-labels", "eval_slc_labels", None),
    ("--eval-flc-labels", "eval_flc_labels", None),
    ("--sentiment-lexicon", "sentiment_lexicon", None),
    ("--emotion-lexicon", "emotion_lexicon", None),
    ("--loaded-lexicon", "loaded_lexicon", None),
    ("--sense-lexicon", "sense_lexicon", None),
    ("--embeddings", "embeddings", "Word vectors in word2vec text format."),
    ("--annotations", "annotations", "POS/NER sidecar TSV."),
    ("--manifest", "manifest", "Ensemble manifest listing external predictions."),
    ("--tau", "tau_grid", "Decision threshold(s), comma separated."),
    ("--relax-fraction", "relax_fraction", None),
    ("--mode", "ensemble_mode", "majority or relax."),
    ("--window", "window", None),
    ("--lambda", "lambda", None),
    ("--slc-folds", "slc_folds", None),
    ("--flc-folds", "flc_folds", None),
    ("--seed", "seed", None),
]


def config_options(func):
    @click.option("--config", "config_path", type=click.Path(dir_okay=False),
                  help="Flat key = value configuration file; flags override it.")
    @click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
                  help="Override any configuration key.")
    @click.option("--postprocess/--no-postprocess", default=None)
    @functools.wraps(func)
    def wrapper(*args, config_path=None, overrides=(), postprocess=None, **kwargs):
        flags = {}
        for flag, key, _ in _CONFIG_FLAGS:
            v = kwargs.pop(flag.lstrip("-").replace("-", "_"), None)
            if v is not None:
                flags[key] = v
        for item in overrides:
            if "=" not in item:
                raise click.UsageError(f"--set expects KEY=VALUE, got {item!r}")
            k, v = item.split("=", 1)
            flags[k.strip()] = v
        if postprocess is not None:
            flags["postprocess"] = "true" if postprocess else "false"
        cfg = read_config(config_path) if config_path else PipelineConfig()
        cfg = cfg.updated(**flags)
        return func(*args, config=cfg, **kwargs)

    for flag, _, help_ in reversed(_CONFIG_FLAGS):
        wrapper = click.option(flag, default=None, type=str, help=help_)(wrapper)
    return wrapper


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Log progress to stderr.")
def cli(verbose):
    """Sentence- and fragment-level propaganda detection."""
    logging.basicConfig(level=logging.INFO if verbose else logging.ERROR,
                        format="%(levelname)s %(name)s: %(message)s")


# ---------------------------------------------------------------------------

@cli.command()
@config_options
@click.option("--out", type=click.Path(dir_okay=False), help="Write a column registry TSV.")
def ingest(config, out):
    """Validate a corpus, its labels and any external prediction files."""
    from .corpus import load_articles, load_flc_labels, load_slc_labels
    from .ensemble import ingest_fragments, ingest_predictions, read_manifest

    config.validate()
    docs = None
    if config.corpus_dir is not None:
        docs = load_articles(config.corpus_dir)
        n_sent = sum(len(d.sentences) for d in docs.values())
        n_kept = sum(len(d.retained_sentences) for d in docs.values())
        click.echo(f"articles\t{len(docs)}\nsentences\t{n_sent}\nretained\t{n_kept}")
        if config.slc_labels is not None:
            labels = load_slc_labels(config.slc_labels, docs)
            click.echo(f"slc_labels\t{len(labels)}\tpropaganda\t{sum(labels.values())}")
        if config.flc_labels is not None:
            frags = load_flc_labels(config.flc_labels, docs)
            click.echo(f"fragments\t{len(frags)}\ttechniques\t{len({f.technique for f in frags})}")
    if config.manifest is not None:
        manifest = read_manifest(config.manifest)
        target = load_articles(config.eval_dir) if config.eval_dir is not None else docs
        if manifest.task == "slc":
            store = ingest_predictions(manifest, target)
            sizes = {c: len(v) for c, v in store.items()}
        else:
            store = ingest_fragments(manifest, target)
            sizes = {c: len(v) for c, v in store.items()}
        click.echo(f"columns\t{len(store)}")
        lines = [f"{s.column}\t{s.model_id}\t{s.fold}\t{s.dev_f1}\t{s.path}\t{sizes[s.column]}"
                 for s in manifest.sources]
        for line in lines:
            click.echo(line)
        if out:
            Path(out).write_text("\n".join(lines) + "\n", encoding="utf-8")


@cli.command()
@config_options
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--lda-model", type=click.Path(exists=True, dir_okay=False),
              help="Use a saved topic model instead of fitting one.")
def featurize(config, out, lda_model):
    """Write the sentence feature matrix of a corpus as TSV."""
    from .pipeline import _pairs, load_resources, make_featurizer
    from .topics import GibbsLDA
    from .utils import fmt_float

    config.validate(require=("corpus_dir",))
    res = load_resources(_single_corpus(config))
    pairs = _pairs(res.documents)
    lda = GibbsLDA.load(lda_model) if lda_model else None
    fz = make_featurizer(config, res, lda).fit(pairs)
    X = fz.transform(pairs)
    with open(out, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"# schema_id={fz.schema_id_}\n")
        fh.write("article_id\tsentence_index\t" + "\t".join(fz.feature_names_) + "\n")
        for (_, s), row in zip(pairs, X):
            fh.write(f"{s.article_id}\t{s.index}\t" + "\t".join(fmt_float(v) for v in row) + "\n")
    click.echo(f"{len(pairs)} sentences x {X.shape[1]} features ({fz.schema_id_})")


@cli.command("train-slc")
@config_options
@click.option("--out", type=click.Path(file_okay=False), required=True, help="Model directory.")
def train_slc(config, out):
    """Train the sentence classifier on a whole labelled corpus."""
    import numpy as np

    from .corpus import load_flc_labels, load_slc_labels, slc_gold_from_fragments
    from .models import LogisticRegressionGD, LogRegModel, select_tau
    from .pipeline import _pairs, load_resources, make_featurizer

    config.validate(require=("corpus_dir",))
    res = load_resources(_single_corpus(config))
    if config.slc_labels is not None:
        gold = load_slc_labels(config.slc_labels, res.documents)
    elif config.flc_labels is not None:
        load_flc_labels(config.flc_labels, res.documents)
        gold = slc_gold_from_fragments(res.documents)
    else:
        raise click.UsageError("train-slc needs --slc-labels or --flc-labels")
    pairs = [p for p in _pairs(res.documents) if p[1].key in gold]
    fz = make_featurizer(config, res).fit(pairs)
    X = fz.transform(pairs)
    y = np.array([int(gold[s.key]) for _, s in pairs])
    est = LogisticRegressionGD(l2=config.logreg_l2, epochs=config.logreg_epochs,
                               learning_rate=config.logreg_learning_rate).fit(X, y)
    tau = config.tau_grid[0]
    if len(config.tau_grid) > 1:
        tau, _ = select_tau(est.predict_proba(X)[:, 1], y.astype(bool), config.tau_grid)
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    LogRegModel(est.coef_, est.intercept_, config.logreg_l2, fz.schema_id_,
                tuple(fz.feature_names_), tau).save(out / "logreg.model")
    if fz.lda_ is not None:
        fz.lda_.save(out / "lda.model")
    click.echo(f"trained on {len(y)} sentences, tau={tau}, schema={fz.schema_id_}")


@cli.command("train-flc")
@config_options
@click.option("--out", type=click.Path(dir_okay=False), required=True, help="CRF model file.")
@click.option("--groups", default=None, help="Token feature groups joined by '+'.")
def train_flc(config, out, groups):
    """Train the fragment tagger on a whole labelled corpus."""
    from .corpus import encode_bio, load_flc_labels, tag_set, technique_vocabulary
    from .models import TOKEN_FEATURE_GROUPS, LinearChainCRF, sentence_token_features
    from .pipeline import load_resources

    config.validate(require=("corpus_dir", "flc_labels"))
    res = load_resources(_single_corpus(config))
    gold = load_flc_labels(config.flc_labels, res.documents)
    gs = tuple(groups.split("+")) if groups else TOKEN_FEATURE_GROUPS
    if set(gs) - set(TOKEN_FEATURE_GROUPS):
        raise click.UsageError(f"unknown feature groups in {groups!r}")
    sents = [s for d in res.documents.values() for s in d.retained_sentences]
    X = [sentence_token_features(s, res.lexicons, gs) for s in sents]
    y = [encode_bio(s, res.documents[s.article_id].fragments).tags for s in sents]
    crf = LinearChainCRF(l2=config.crf_l2, epochs=config.crf_epochs,
                         learning_rate=config.crf_learning_rate,
                         tags=tag_set(technique_vocabulary(gold)), random_state=config.seed).fit(X, y)
    crf.save(out)
    click.echo(f"trained on {len(sents)} sentences, {len(crf.tags_)} tags, {len(crf.features_)} features")


@cli.command()
@config_options
@click.option("--task", type=click.Choice(["slc", "flc"]), required=True)
@click.option("--model", "model_path", type=click.Path(exists=True), required=True,
              help="SLC model directory (or logreg.model file) / CRF model file.")
@click.option("--model-id", default=None)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def predict(config, task, model_path, model_id, out):
    """Apply a saved model to a corpus."""
    from .corpus import decode_bio, write_fragments
    from .models import LinearChainCRF, LogRegModel, SentencePrediction, sentence_token_features, write_predictions
    from .pipeline import _pairs, load_resources, make_featurizer
    from .topics import GibbsLDA

    config.validate(require=("corpus_dir",))
    res = load_resources(_single_corpus(config))
    path = Path(model_path)
    if task == "slc":
        mfile = path / "logreg.model" if path.is_dir() else path
        model = LogRegModel.load(mfile)
        lda_file = mfile.parent / "lda.model"
        lda = GibbsLDA.load(lda_file) if lda_file.exists() else None
        pairs = _pairs(res.documents)
        fz = make_featurizer(config, res, lda).fit(pairs)
        if fz.schema_id_ != model.schema_id:
            raise SchemaMismatchError(f"features {fz.schema_id_!r} do not match model {model.schema_id!r}")
        probs = model.probabilities(fz.transform(pairs))
        mid = model_id or "logreg"
        write_predictions(out, [SentencePrediction(s.article_id, s.index, float(p), mid)
                                for (_, s), p in zip(pairs, probs)])
        click.echo(f"{len(pairs)} sentence predictions (tau={model.tau})")
    else:
        crf = LinearChainCRF.load(path)
        frags = []
        for doc in res.documents.values():
            for s in doc.retained_sentences:
                frags += decode_bio(crf.viterbi(sentence_token_features(s, res.lexicons)), s)
        write_fragments(out, frags, model_id=model_id or path.stem)
        click.echo(f"{len(frags)} fragments")


@cli.command()
@click.option("--manifest", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--corpus-dir", type=click.Path(exists=True, file_okay=False),
              help="Check coverage against these articles.")
@click.option("--mode", type=click.Choice(["majority", "relax"]), default=None)
@click.option("--relax-fraction", type=float, default=None)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
@click.option("--matrix-out", type=click.Path(dir_okay=False), default=None)
def ensemble(manifest, corpus_dir, mode, relax_fraction, out, matrix_out):
    """Vote over sentence predictions or merge fragment predictions."""
    from .corpus import load_articles, write_fragments, write_slc_labels
    from .ensemble import build_matrix, ingest_fragments, ingest_predictions, merge_fragments, read_manifest
    from .ensemble.manifest import threshold_column

    m = read_manifest(manifest)
    if mode:
        m.mode = mode
    if relax_fraction is not None:
        m.relax_fraction = relax_fraction
    docs = load_articles(corpus_dir) if corpus_dir else None
    if not m.sources:
        raise DataFormatError("manifest lists no sources", manifest)
    if m.task == "slc":
        store = ingest_predictions(m, docs)
        cols = {s.column: threshold_column(store[s.column], s.tau if s.tau is not None else m.tau)
                for s in m.sources}
        rows = sorted(s.key for d in docs.values() for s in d.retained_sentences) if docs else None
        matrix = build_matrix(cols, rows)
        labels = matrix.vote(m.ensemble_config())
        write_slc_labels(out, labels)
        if matrix_out:
            matrix.write(matrix_out)
        click.echo(f"{len(labels)} sentences, {len(matrix.columns)} columns, mode={m.mode}")
    else:
        sets = ingest_fragments(m, docs)
        order = [s.column for s in m.sources]
        merged = merge_fragments([sets[c] for c in order], len(order))
        write_fragments(out, merged)
        click.echo(f"{len(merged)} fragments merged from {len(order)} sources")


@cli.command()
@click.option("--corpus-dir", type=click.Path(exists=True, file_okay=False), required=True)
@click.option("--labels", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--embeddings", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--window", type=int, default=10, show_default=True)
@click.option("--lambda", "lam", type=float, default=0.99, show_default=True)
@click.option("--out", type=click.Path(dir_okay=False), required=True)
def postprocess(corpus_dir, labels, embeddings, window, lam, out):
    """Relabel sentences that repeat a recent sentence as propaganda."""
    from .corpus import load_articles, load_slc_labels, write_slc_labels
    from .ensemble import postprocess_corpus
    from .features import load_word_vectors

    docs = load_articles(corpus_dir)
    before = load_slc_labels(labels, docs)
    after = postprocess_corpus(docs, load_word_vectors(embeddings), before, window, lam)
    write_slc_labels(out, after)
    flipped = sum(1 for k, v in after.items() if v and not before.get(k, False))
    click.echo(f"{flipped} sentence(s) flipped to propaganda")


@cli.command()
@click.option("--task", type=click.Choice(["slc", "flc"]), required=True)
@click.option("--pred", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--gold", type=click.Path(exists=True, dir_okay=False), required=True)
@click.option("--corpus-dir", type=click.Path(exists=True, file_okay=False), default=None)
@click.option("--out", type=click.Path(dir_okay=False), default=None, help="Machine-readable TSV report.")
def evaluate(task, pred, gold, corpus_dir, out):
    """Score predictions against gold labels."""
    from .corpus import load_articles, load_flc_labels, load_slc_labels
    from .evaluation import flc_strict_scores, format_table, format_tsv, report_rows, slc_scores

    docs = load_articles(corpus_dir) if corpus_dir else None
    if task == "slc":
        g = load_slc_labels(gold, docs)
        try:
            score = slc_scores(load_slc_labels(pred, docs), g)
        except KeyError as e:
            raise DataFormatError(str(e.args[0]), pred) from None
        click.echo(format_table(score, "SLC binary scores"), nl=False)
    else:
        score = flc_strict_scores(load_flc_labels(pred, docs), load_flc_labels(gold, docs))
        click.echo(format_table(score, "FLC strict-boundary scores"), nl=False)
    if out:
        Path(out).write_text(format_tsv(report_rows(score)), encoding="utf-8")


@cli.command("run-slc")
@config_options
@click.option("--out", type=click.Path(file_okay=False), required=True)
def run_slc_cmd(config, out):
    """Fold experiment for sentence classification, with optional ensemble+."""
    from .pipeline import run_slc

    result = run_slc(config, out)
    _summary(result)


@cli.command("run-flc")
@config_options
@click.option("--out", type=click.Path(file_okay=False), required=True)
def run_flc_cmd(config, out):
    """Fold experiment for fragment detection, with cross-fold span merging."""
    from .pipeline import run_flc

    result = run_flc(config, out)
    _summary(result)


def _single_corpus(config):
    # commands that act on one corpus ignore the ensemble target
    return dataclasses.replace(config, eval_dir=None, manifest=None)


def _summary(result):
    from .evaluation import format_table

    click.echo(format_table(result.fold_report.pooled, "dev (internal), pooled over folds"), nl=False)
    click.echo(f"ensemble columns: {result.n_columns}")
    if result.final_score is not None:
        click.echo(format_table(result.final_score, "final"), nl=False)
    click.echo(f"outputs in {result.output_dir}")


@cli.command()
@click.option("--out", type=click.Path(file_okay=False), required=True)
@click.option("--articles", default=20, show_default=True)
@click.option("--sentences", default=15, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--with-eval/--no-eval", default=True, help="Also write an evaluation corpus.")
def synth(out, articles, sentences, seed, with_eval):
    """Write a small synthetic corpus, resources and example configs."""
    from .synthetic import generate_corpus, generate_resources

    out = Path(out)
    train = generate_corpus(out / "train", articles, sentences, seed=seed)
    res = generate_resources(out / "resources", seed=seed)
    lines = [f"corpus_dir = {train['articles'].relative_to(out)}",
             f"slc_labels = {train['slc_labels'].relative_to(out)}",
             f"flc_labels = {train['flc_labels'].relative_to(out)}"]
    lines += [f"{k} = {v.relative_to(out)}" for k, v in res.items()]
    if with_eval:
        ev = generate_corpus(out / "eval", max(articles // 2, 2), sentences, seed=seed + 1,
                             first_id=900000, repeats=2)
        lines += [f"eval_dir = {ev['articles'].relative_to(out)}",
                  f"eval_slc_labels = {ev['slc_labels'].relative_to(out)}",
                  f"eval_flc_labels = {ev['flc_labels'].relative_to(out)}"]
    lines += [f"seed = {seed}", "lda_iterations = 200"]
    (out / "config.txt").write_text("\n".join(lines) + "\n", encoding="utf-8")
    click.echo(f"wrote synthetic data and {out / 'config.txt'}")


# ---------------------------------------------------------------------------

def main(argv=None):
    try:
        rv = cli.main(args=argv, prog_name="propdetect", standalone_mode=False)
    except click.exceptions.Exit as e:
        return e.exit_code
    except (click.UsageError, click.Abort) as e:
        if isinstance(e, click.UsageError):
            e.show()
        return EXIT_USAGE
    except (DataFormatError, CoverageError, SchemaMismatchError) as e:
        click.echo(f"error: {e}", err=True)
        return EXIT_DATA
    except InvariantError as e:
        click.echo(f"internal error: {e}", err=True)
        return EXIT_INTERNAL
    return rv if isinstance(rv, int) else EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
