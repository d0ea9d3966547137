"""Greedy same-category merging of confused classes into viseme maps.

At each level the counts are column-normalised, every same-category pair
``(r, s)`` is scored by ``q = P[r, s] + P[s, r]`` and the highest-scoring
pair is merged by summing rows and columns. Merging stops when no two
classes share a category, which with both categories present leaves one
vowel class and one consonant class. Every level along the way is a P2V
map.
"""

import csv
import io
import os
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .confusion import column_normalize, merge_classes
from .errors import NoLegalPair, NothingToCluster, UnknownPhoneme
from .inventory import Category
from .lexicon import P2VMap, VisemeClass, serialize_map

TIE_DECIMALS = 12
SEP = "+"


@dataclass(frozen=True)
class MergeStep:
    level_before: int
    merged_pair: tuple
    score: float
    tie_broken: bool


@dataclass
class MapHierarchy:
    speaker_id: str
    initial_classes: int
    maps: dict
    trace: list
    seed: int
    dropped: list = field(default_factory=list)
    folds: int = 1

    @property
    def levels(self):
        """Class counts from the initial level downwards."""
        return sorted(self.maps, reverse=True)

    def __getitem__(self, m):
        return self.maps[m]


def pair_score(p, r, s):
    i, j = p.index(r), p.index(s)
    if i == j:
        raise NoLegalPair(f"{r!r} paired with itself")
    return float(p.probs[i, j] + p.probs[j, i])


def best_pair(p, categories, rng):
    """Highest-scoring same-category pair as ``(r, s, q, tie_broken)``.

    Scores equal after rounding to 12 decimals count as tied and one is
    drawn uniformly with ``rng``; ``rng`` is only consulted on a tie.
    """
    cats = np.array([categories[lab] is Category.VOWEL for lab in p.labels])
    same = np.triu(cats[:, None] == cats[None, :], k=1)
    rows, cols = np.nonzero(same)
    if not len(rows):
        raise NoLegalPair("no two classes share a category")
    scores = p.probs[rows, cols] + p.probs[cols, rows]
    rounded = np.round(scores, TIE_DECIMALS)
    tied = np.flatnonzero(rounded == rounded.max())
    pick = tied[0] if len(tied) == 1 else tied[rng.integers(len(tied))]
    i, j = rows[pick], cols[pick]
    return p.labels[i], p.labels[j], float(scores[pick]), len(tied) > 1


def _make_map(classes, inventory):
    def key(members):
        cat = inventory.category(members[0])
        return (cat is not Category.VOWEL, len(members), inventory.index[members[0]])

    ordered = sorted(classes, key=key)
    return P2VMap(
        [
            VisemeClass(f"V{n:02d}", members, inventory.category(members[0]))
            for n, members in enumerate(ordered, 1)
        ]
    )


def build_hierarchy(k, inventory, seed=0, speaker_id="", folds=1):
    """Merge down from the observed phonemes of ``k`` to two classes.

    Phonemes whose row and column are both empty were never seen and are
    dropped before clustering; they are listed in ``dropped``.
    """
    for lab in k.labels:
        if lab not in inventory:
            raise UnknownPhoneme(f"confusion label {lab!r} not in inventory")
    dropped = k.unobserved()
    k = k.select([lab for lab in k.labels if lab not in dropped])
    cats = [inventory.category(lab) for lab in k.labels]
    n_vowel = cats.count(Category.VOWEL)
    n_cons = cats.count(Category.CONSONANT)
    if n_vowel == 0 or n_cons == 0 or max(n_vowel, n_cons) < 2:
        raise NothingToCluster(
            f"{n_vowel} vowel and {n_cons} consonant classes observed; "
            "need both categories and two of one"
        )

    rng = np.random.default_rng(seed)
    members = {lab: (lab,) for lab in k.labels}
    categories = {lab: inventory.category(lab) for lab in k.labels}
    m0 = len(k.labels)
    maps = {m0: _make_map(list(members.values()), inventory)}
    trace = []
    while True:
        p = column_normalize(k)
        try:
            r, s, q, tie = best_pair(p, categories, rng)
        except NoLegalPair:
            break
        merged = tuple(sorted(members[r] + members[s], key=inventory.index.__getitem__))
        new_label = SEP.join(merged)
        trace.append(MergeStep(len(k.labels), (members[r], members[s]), q, tie))
        k = merge_classes(k, r, s, new_label)
        categories[new_label] = categories.pop(r)
        del categories[s]
        del members[r], members[s]
        members[new_label] = merged
        maps[len(k.labels)] = _make_map(list(members.values()), inventory)
    return MapHierarchy(
        speaker_id=speaker_id,
        initial_classes=m0,
        maps=maps,
        trace=trace,
        seed=seed,
        dropped=dropped,
        folds=folds,
    )


def map_filename(m):
    return f"p2v_M{m:02d}.map"


def trace_csv(h):
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow(["level_before", "class_a", "class_b", "q", "tie_broken"])
    for step in h.trace:
        a, b = step.merged_pair
        w.writerow([step.level_before, " ".join(a), " ".join(b), f"{step.score:.12f}", int(step.tie_broken)])
    return out.getvalue()


def meta_text(h):
    return (
        f"speaker_id {h.speaker_id}\n"
        f"seed {h.seed}\n"
        f"folds {h.folds}\n"
        f"initial_classes {h.initial_classes}\n"
        f"dropped {' '.join(h.dropped)}\n"
        f"version {__version__}\n"
    )


def write_hierarchy(h, out_dir):
    """Write one map file per level plus ``trace.csv`` and ``meta.txt``."""
    os.makedirs(out_dir, exist_ok=True)
    for m in h.levels:
        header = [f"speaker {h.speaker_id} M={m} seed={h.seed} p2v {__version__}"]
        with open(os.path.join(out_dir, map_filename(m)), "w") as f:
            f.write(serialize_map(h.maps[m], header))
    with open(os.path.join(out_dir, "trace.csv"), "w") as f:
        f.write(trace_csv(h))
    with open(os.path.join(out_dir, "meta.txt"), "w") as f:
        f.write(meta_text(h))
