"""Transcript alignment and correctness/accuracy scoring.

Alignment is the usual weighted edit distance with HTK's default costs
(substitution 10, deletion 7, insertion 7). Scores pool counts over all
utterances before dividing::

    C = (N - D - S) / N
    A = (N - D - S - I) / N
"""

import csv
import io
import os
from dataclasses import dataclass, field

from .errors import (
    DuplicateUtterance,
    MalformedLine,
    UndefinedScore,
    UnknownUtterance,
)

HTK_COSTS = {"sub": 10, "del": 7, "ins": 7}
UNIT_COSTS = {"sub": 1, "del": 1, "ins": 1}


@dataclass
class Transcript:
    utterances: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.utterances)

    def __iter__(self):
        return iter(self.utterances.items())

    def add(self, utt_id, tokens, line=None, source=None):
        if utt_id in self.utterances:
            raise DuplicateUtterance(f"utterance {utt_id!r} repeated", line, source)
        self.utterances[utt_id] = tuple(tokens)


def _mlf_id(header):
    name = header.strip().strip('"')
    name = name.replace("\\", "/").rsplit("/", 1)[-1]
    return os.path.splitext(name)[0]


def _parse_mlf(lines, source):
    t = Transcript()
    current = None
    tokens = []
    start = 0
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or lineno == 1:
            continue
        if current is None:
            if not line.startswith('"'):
                raise MalformedLine(f"expected a quoted label file name, got {line!r}", lineno, source)
            current, tokens, start = _mlf_id(line), [], lineno
            continue
        if line == ".":
            t.add(current, tokens, start, source)
            current = None
            continue
        fields = line.split()
        # optional "start end" times precede the label
        while len(fields) > 1 and fields[0].lstrip("-").isdigit():
            fields = fields[1:]
        tokens.append(fields[0])
    if current is not None:
        raise MalformedLine(f"label block {current!r} not terminated by '.'", start, source)
    return t


def parse_transcript(text, source=None):
    """Read ``<utt-id> tok tok ...`` lines or an HTK MLF subset.

    An MLF is recognised by its ``#!MLF!#`` first line; each quoted
    ``"*/id.lab"`` block holds one token per line and ends with ``.``.
    """
    lines = text.splitlines()
    if lines and lines[0].strip() == "#!MLF!#":
        return _parse_mlf(lines, source)
    t = Transcript()
    for lineno, raw in enumerate(lines, 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        utt_id, *tokens = line.split()
        if not tokens:
            raise MalformedLine(f"utterance {utt_id!r} has no tokens", lineno, source)
        t.add(utt_id, tokens, lineno, source)
    return t


def serialize_transcript(t):
    return "".join(f"{u} {' '.join(toks)}\n" for u, toks in t.utterances.items())


@dataclass(frozen=True)
class AlignmentCounts:
    n: int = 0
    h: int = 0
    s: int = 0
    d: int = 0
    i: int = 0

    def __add__(self, other):
        return AlignmentCounts(
            self.n + other.n, self.h + other.h, self.s + other.s, self.d + other.d, self.i + other.i
        )


def align(ref, hyp, costs=None):
    """Counts from one minimal-cost alignment of ``hyp`` against ``ref``.

    On equal cost the backtrace prefers the diagonal, then a deletion,
    then an insertion.
    """
    costs = costs or HTK_COSTS
    sub, dele, ins = costs["sub"], costs["del"], costs["ins"]
    if min(sub, dele, ins) <= 0:
        raise ValueError("alignment costs must be positive")
    n, m = len(ref), len(hyp)
    prev = [j * ins for j in range(m + 1)]
    table = [prev]
    for a in range(1, n + 1):
        r = ref[a - 1]
        row = [a * dele]
        for b in range(1, m + 1):
            diag = prev[b - 1] + (0 if r == hyp[b - 1] else sub)
            up = prev[b] + dele
            left = row[b - 1] + ins
            row.append(min(diag, up, left))
        table.append(row)
        prev = row

    h = s = d = i = 0
    a, b = n, m
    while a or b:
        here = table[a][b]
        if a and b:
            same = ref[a - 1] == hyp[b - 1]
            if here == table[a - 1][b - 1] + (0 if same else sub):
                if same:
                    h += 1
                else:
                    s += 1
                a -= 1
                b -= 1
                continue
        if a and here == table[a - 1][b] + dele:
            d += 1
            a -= 1
        else:
            i += 1
            b -= 1
    return AlignmentCounts(n=n, h=h, s=s, d=d, i=i)


def correctness(counts):
    if counts.n == 0:
        raise UndefinedScore("correctness undefined for an empty reference")
    return (counts.n - counts.d - counts.s) / counts.n


def accuracy(counts):
    if counts.n == 0:
        raise UndefinedScore("accuracy undefined for an empty reference")
    return (counts.n - counts.d - counts.s - counts.i) / counts.n


@dataclass
class ScoreReport:
    counts: AlignmentCounts
    correctness: float
    accuracy: float
    per_utterance: list

    def line(self):
        c = self.counts
        return (
            f"N={c.n} H={c.h} S={c.s} D={c.d} I={c.i} "
            f"C={self.correctness:.6f} A={self.accuracy:.6f}"
        )

    def to_csv(self):
        c = self.counts
        return (
            "N,H,S,D,I,C,A\n"
            f"{c.n},{c.h},{c.s},{c.d},{c.i},{self.correctness:.6f},{self.accuracy:.6f}\n"
        )

    def per_utterance_csv(self):
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["utt_id", "N", "H", "S", "D", "I"])
        for utt, c in self.per_utterance:
            w.writerow([utt, c.n, c.h, c.s, c.d, c.i])
        return out.getvalue()


def score_transcripts(ref, hyp, costs=None):
    """Pool per-utterance alignments into one report.

    Reference utterances with no hypothesis count as all deletions.
    """
    for utt in hyp.utterances:
        if utt not in ref.utterances:
            raise UnknownUtterance(f"hypothesis utterance {utt!r} has no reference")
    per_utt = []
    total = AlignmentCounts()
    for utt, tokens in ref:
        c = align(tokens, hyp.utterances.get(utt, ()), costs)
        per_utt.append((utt, c))
        total = total + c
    return ScoreReport(total, correctness(total), accuracy(total), per_utt)
