"""Confusion matrices over phoneme or viseme classes.

Orientation is fixed: row ``i`` is the reference class, column ``j`` the
hypothesis, so ``counts[i, j]`` is how often ``i`` was recognised as ``j``.
Counts stay integral until :func:`column_normalize`.
"""

import csv
import io
import re
from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyFoldSet,
    InvalidCount,
    LabelMismatch,
    SelfMerge,
    UnknownLabel,
)


def _frozen(a):
    a = np.array(a)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class ConfusionCounts:
    labels: tuple
    counts: np.ndarray

    def __post_init__(self):
        labels = tuple(self.labels)
        counts = np.asarray(self.counts)
        if counts.ndim != 2 or counts.shape != (len(labels), len(labels)):
            raise LabelMismatch(
                f"counts shape {counts.shape} does not match {len(labels)} labels"
            )
        if len(set(labels)) != len(labels):
            raise LabelMismatch("duplicate class labels")
        if counts.size and (counts < 0).any():
            raise InvalidCount("negative count")
        object.__setattr__(self, "labels", labels)
        object.__setattr__(self, "counts", _frozen(counts.astype(np.int64)))

    def __eq__(self, other):
        if not isinstance(other, ConfusionCounts):
            return NotImplemented
        return self.labels == other.labels and np.array_equal(self.counts, other.counts)

    def __len__(self):
        return len(self.labels)

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"unknown class {label!r}") from None

    @property
    def total(self):
        return int(self.counts.sum())

    def unobserved(self):
        """Labels whose row and column are both all zero."""
        rows = self.counts.sum(axis=1)
        cols = self.counts.sum(axis=0)
        return [lab for lab, r, c in zip(self.labels, rows, cols) if r == 0 and c == 0]

    def select(self, keep):
        keep = list(keep)
        idx = [self.index(lab) for lab in keep]
        return ConfusionCounts(tuple(keep), self.counts[np.ix_(idx, idx)])


@dataclass(frozen=True, eq=False)
class NormalizedConfusion:
    labels: tuple
    probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "labels", tuple(self.labels))
        object.__setattr__(self, "probs", _frozen(np.asarray(self.probs, dtype=float)))

    def index(self, label):
        try:
            return self.labels.index(label)
        except ValueError:
            raise UnknownLabel(f"unknown class {label!r}") from None


def parse_confusion_csv(text, source=None):
    """Read a dense count matrix.

    The header holds hypothesis labels after an ignored corner cell; each
    following row starts with its reference label.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if any(cell.strip() for cell in r)]
    if not rows:
        raise LabelMismatch("empty confusion file", None, source)
    header = [c.strip() for c in rows[0][1:]]
    ref_labels = []
    counts = []
    for lineno, row in enumerate(rows[1:], 2):
        label = row[0].strip()
        cells = [c.strip() for c in row[1:]]
        if len(cells) != len(header):
            raise LabelMismatch(
                f"row {label!r} has {len(cells)} cells, header has {len(header)}", lineno, source
            )
        values = []
        for cell in cells:
            if not re.fullmatch(r"\d+", cell):
                raise InvalidCount(f"bad count {cell!r} in row {label!r}", lineno, source)
            values.append(int(cell))
        ref_labels.append(label)
        counts.append(values)
    if ref_labels != header:
        raise LabelMismatch(
            f"row labels {ref_labels} differ from header labels {header}", None, source
        )
    if len(set(header)) != len(header):
        raise LabelMismatch("duplicate labels in header", 1, source)
    return ConfusionCounts(tuple(header), np.array(counts, dtype=np.int64).reshape(len(header), len(header)))


def to_csv(k):
    out = io.StringIO()
    w = csv.writer(out, lineterminator="\n")
    w.writerow([""] + list(k.labels))
    for label, row in zip(k.labels, k.counts):
        w.writerow([label] + [int(v) for v in row])
    return out.getvalue()


def parse_hresults(text, source=None):
    """Best-effort import of an HTK ``HResults -p`` confusion table.

    Only the square block is read: the ``Del`` column, the bracketed
    percentages and the trailing ``Ins`` row are discarded. HResults may
    truncate long labels, so the labels come back as printed.
    """
    lines = text.splitlines()
    start = next((i for i, ln in enumerate(lines) if "Confusion Matrix" in ln), None)
    if start is None:
        raise LabelMismatch("no 'Confusion Matrix' section found", None, source)
    header = None
    rows = []
    for lineno in range(start + 1, len(lines)):
        fields = lines[lineno].split()
        if not fields:
            continue
        if fields[0].startswith("==="):
            break
        if header is None:
            header = [f for f in fields if f not in ("Del", "[", "%c", "/", "%e]")]
            header = [f for f in header if not f.startswith("[")]
            continue
        if fields[0] == "Ins" or fields[0].startswith("---"):
            break
        label = fields[0]
        nums = fields[1 : 1 + len(header)]
        if len(nums) != len(header) or not all(n.isdigit() for n in nums):
            raise InvalidCount(f"malformed confusion row for {label!r}", lineno + 1, source)
        rows.append((label, [int(n) for n in nums]))
    if header is None:
        raise LabelMismatch("confusion header missing", None, source)
    ref_labels = [lab for lab, _ in rows]
    if ref_labels != header:
        raise LabelMismatch(f"row labels {ref_labels} differ from header {header}", None, source)
    return ConfusionCounts(tuple(header), np.array([r for _, r in rows], dtype=np.int64).reshape(len(header), len(header)))


def sum_folds(folds):
    folds = list(folds)
    if not folds:
        raise EmptyFoldSet("no confusion matrices to sum")
    labels = folds[0].labels
    for n, fold in enumerate(folds[1:], 2):
        if fold.labels != labels:
            raise LabelMismatch(f"fold {n} labels differ from fold 1")
    total = np.zeros((len(labels), len(labels)), dtype=np.int64)
    for fold in folds:
        total += fold.counts
    return ConfusionCounts(labels, total)


def column_normalize(k):
    """Column-normalised probabilities ``Pr(reference i | hypothesis j)``.

    A column that was never hypothesised stays zero rather than uniform.
    """
    counts = k.counts.astype(float)
    colsum = counts.sum(axis=0)
    probs = np.zeros_like(counts)
    nz = colsum > 0
    probs[:, nz] = counts[:, nz] / colsum[nz]
    return NormalizedConfusion(k.labels, probs)


def merge_classes(k, r, s, new_label):
    """Fold classes ``r`` and ``s`` into ``new_label``.

    Rows and columns are summed; the merged class takes the position of
    whichever of ``r``/``s`` came first.
    """
    if r == s:
        raise SelfMerge(f"cannot merge {r!r} with itself")
    i, j = sorted((k.index(r), k.index(s)))
    c = k.counts.copy()
    c[i, :] += c[j, :]
    c[:, i] += c[:, j]
    c = np.delete(np.delete(c, j, axis=0), j, axis=1)
    labels = list(k.labels)
    labels[i] = new_label
    del labels[j]
    return ConfusionCounts(tuple(labels), c)
