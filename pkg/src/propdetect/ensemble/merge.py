from __future__ import annotations

from collections import defaultdict

from ..corpus import Fragment


def _plurality(candidates):
    """Most frequent label; ties go to the earliest ``(model, position)`` emitter."""
    counts = defaultdict(int)
    first = {}
    for order, label in candidates:
        counts[label] += 1
        first.setdefault(label, order)
    return min(counts, key=lambda lab: (-counts[lab], first[lab]))


def merge_fragments(fragment_sets, model_count=None):
    """Combine per-model fragment lists into one fragment list.

    1. Fragments with identical spans collapse into one, labelled by
       plurality across models (ties go to the earlier model).  A span
       emitted by any model survives.
    2. Same-label fragments that overlap are resolved in favour of the
       longest span (earliest start on ties); the winner's overlappers drop.
    3. Differently labelled overlaps and disjoint fragments are kept.
    """
    fragment_sets = [list(s) for s in fragment_sets]
    if model_count is not None and model_count != len(fragment_sets):
        raise ValueError(f"expected {model_count} fragment sets, got {len(fragment_sets)}")
    groups = defaultdict(list)
    for m, frags in enumerate(fragment_sets):
        for p, f in enumerate(frags):
            groups[(f.article_id, f.start, f.end)].append(((m, p), f.technique))
    voted = [Fragment(aid, s, e, _plurality(c)) for (aid, s, e), c in groups.items()]

    kept = defaultdict(list)
    for f in sorted(voted, key=lambda f: (f.article_id, -f.length, f.start, f.technique)):
        same = kept[(f.article_id, f.technique)]
        if not any(f.overlaps(g) for g in same):
            same.append(f)
    return sorted(f for fs in kept.values() for f in fs)
