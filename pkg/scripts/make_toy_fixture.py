"""Regenerate the bundled toy transcript and confusion matrix.

The confusion counts are synthetic: phonemes sharing a coarse place of
articulation (or, for vowels, a rough lip shape) confuse with each other
far more often than with the rest. Nothing here is measured data.
"""

import sys
from importlib import resources

import numpy as np

from p2v.confusion import ConfusionCounts, to_csv
from p2v.inventory import Category, default_inventory
from p2v.lexicon import parse_dictionary

VISUAL_GROUPS = [
    "p b m", "f v", "th dh", "t d n s z l", "sh zh ch jh", "k g ng hh", "w r", "y",
    "uw uh ow oy ao ua", "aa ae ah aw ay", "iy ih ey eh ia", "ax er ea oh az",
]


def main(seed=2016):
    rng = np.random.default_rng(seed)
    inv = default_inventory()
    data = resources.files("p2v.data")
    dictionary = parse_dictionary(data.joinpath("toy_beep.dic").read_text(), inv)

    words = list(dictionary.entries)
    picks = words + list(rng.choice(words, size=200 - len(words)))
    rng.shuffle(picks)
    with open(sys.argv[1] + "/toy_transcript.txt", "w") as f:
        for n, w in enumerate(picks, 1):
            f.write(f"toy{n:03d} {w}\n")

    used = set(dictionary.phonemes())
    labels = inv.labels
    group = {ph: g for g, members in enumerate(VISUAL_GROUPS) for ph in members.split()}
    n = len(labels)
    counts = np.zeros((n, n), dtype=int)
    for i, a in enumerate(labels):
        for j, b in enumerate(labels):
            if a not in used or b not in used:
                continue
            if i == j:
                counts[i, j] = rng.integers(20, 60)
            elif inv.category(a) is not inv.category(b):
                counts[i, j] = rng.random() < 0.1
            elif group.get(a) == group.get(b):
                counts[i, j] = rng.integers(3, 16)
            else:
                counts[i, j] = rng.integers(0, 3)
    with open(sys.argv[1] + "/toy_confusion.csv", "w") as f:
        f.write(to_csv(ConfusionCounts(tuple(labels), counts)))


if __name__ == "__main__":
    main()
