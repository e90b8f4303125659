"""Small builders shared across test modules."""
from propdetect.corpus import Fragment, parse_article
from propdetect.features import Lexicons


def doc(text, article_id="1"):
    return parse_article(article_id, text)


def sent(text, article_id="1"):
    return parse_article(article_id, text + "\n").sentences[0]


def frag(start, end, technique, article_id="1"):
    return Fragment(article_id, start, end, technique)


def lex(**kw):
    return Lexicons(**kw)


# ---------------------------------------------------------------------------
# brute-force oracles

import itertools  # noqa: E402

import numpy as np  # noqa: E402
from scipy.special import logsumexp  # noqa: E402

from propdetect.models import LinearChainCRF  # noqa: E402


def random_crf(rng, n_tags, n_features, scale=1.0, bio=False):
    """A CRF with random parameters over features ``f0..f{n-1}``."""
    if bio:
        tags = ["O", "B-A", "I-A", "B-B", "I-B"][:n_tags]
    else:
        tags = [f"t{i}" for i in range(n_tags)]
    crf = LinearChainCRF(tags=tags, l2=float(rng.uniform(0, 0.5)))
    crf._init_params([f"f{i}" for i in range(n_features)], tags)
    crf.set_theta(rng.normal(scale=scale, size=crf.get_theta().shape))
    return crf


def random_token_features(rng, length, n_features):
    return [[f"f{j}" for j in range(n_features) if rng.random() < 0.5] for _ in range(length)]


def enumerate_scores(crf, token_features):
    """Score of every tag sequence, computed straight from the parameters."""
    K = len(crf.tags_)
    trans = crf.trans_ + crf.penalty_
    start = crf.start_ + crf.start_penalty_
    emit = [[sum(crf.W_[crf.feature_index_[f], k] for f in feats if f in crf.feature_index_)
             for k in range(K)] for feats in token_features]
    out = {}
    for seq in itertools.product(range(K), repeat=len(token_features)):
        s = start[seq[0]] + sum(emit[t][k] for t, k in enumerate(seq))
        s += sum(trans[a, b] for a, b in zip(seq, seq[1:]))
        out[seq] = s
    return out


def brute_force_decode(crf, token_features):
    """``(best tags, best score, log partition)`` by exhaustive enumeration.

    Ties go to the lexicographically smallest index sequence.
    """
    scores = enumerate_scores(crf, token_features)
    best = max(scores.values())
    argbest = min(seq for seq, s in scores.items() if s == best)
    logz = logsumexp(np.array(list(scores.values())))
    return [crf.tags_[k] for k in argbest], best, float(logz)


def central_difference(f, x, h=1e-5):
    g = np.zeros_like(x)
    for i in range(len(x)):
        e = np.zeros_like(x)
        e[i] = h
        g[i] = (f(x + e) - f(x - e)) / (2 * h)
    return g


def relative_error(a, b):
    return float(np.linalg.norm(a - b) / max(np.linalg.norm(b), 1e-12))


def reference_majority(votes, f1):
    """``votes``: list of (model_id, bool).  Counts, then F1 / id tie-break."""
    yes = [m for m, v in votes if v]
    no = [m for m, v in votes if not v]
    if len(yes) * 2 > len(votes):
        return True
    if len(no) * 2 > len(votes):
        return False
    ranked = sorted(votes, key=lambda mv: (-f1[mv[0]], mv[0]))
    return ranked[0][1]


def reference_relax(votes, fraction):
    from fractions import Fraction
    yes = sum(1 for _, v in votes if v)
    return Fraction(yes, len(votes)) >= Fraction(str(fraction))


def _spans_overlap(a, b):
    return a.article_id == b.article_id and a.start < b.end and b.start < a.end


def reference_merge(fragment_sets):
    """Exhaustive reference for span merging.

    Labels of identical spans are settled by counting (ties to the earliest
    model that emitted the label).  Then, per (article, label), the result is
    the unique subset S in which a fragment belongs to S exactly when no
    higher-priority member of S overlaps it, priority being longer span
    first, then earlier start.  The subset is found by trying all of them.
    """
    import itertools
    from collections import Counter

    from propdetect.corpus import Fragment

    spans = {}
    for m, frags in enumerate(fragment_sets):
        for f in frags:
            spans.setdefault((f.article_id, f.start, f.end), []).append((m, f.technique))
    voted = []
    for (aid, s, e), cands in spans.items():
        counts = Counter(t for _, t in cands)
        top = max(counts.values())
        first_model = {}
        for m, t in cands:
            first_model.setdefault(t, m)
        label = min((t for t in counts if counts[t] == top), key=lambda t: first_model[t])
        voted.append(Fragment(aid, s, e, label))
    groups = {}
    for f in voted:
        groups.setdefault((f.article_id, f.technique), []).append(f)
    out = []
    for members in groups.values():
        def prio(f):
            return (-(f.end - f.start), f.start)
        stable = []
        for r in range(len(members) + 1):
            for subset in itertools.combinations(members, r):
                chosen = set(subset)
                ok = all((f in chosen) == (not any(g is not f and _spans_overlap(f, g) and prio(g) < prio(f)
                                                   for g in chosen))
                         for f in members)
                if ok:
                    stable.append(chosen)
        assert len(stable) == 1, "stable selection must be unique"
        out += stable[0]
    return sorted(out)
