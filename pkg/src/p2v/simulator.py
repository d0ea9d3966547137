"""A parametric confusion channel standing in for HMM recognisers.

The channel is a model, not a fit to any corpus. For reference phoneme
``r`` the hypothesis is drawn from row ``r`` of the base confusion,
renormalised (a flat prior over hypotheses turns ``Pr(ref | hyp)`` into
``Pr(hyp | ref)``). Two knobs shape it:

``noise_scale``
    multiplies each phoneme's off-diagonal error mass; 0 gives a perfect
    recogniser and 1 the base confusion as given.
``dilution_exponent``
    at a map with ``M`` of ``m0`` classes, each viseme class's error mass
    is multiplied by ``(M / m0) ** dilution_exponent`` and clipped to 1,
    so large class sets, with fewer training examples per class, err more.

Words are decoded whole: each hypothesised viseme segment goes to the
lexicon entry nearest in unit-cost edit distance, ties drawn uniformly.
Within an utterance, words are separated by the ``sp`` token.
"""

import csv
import io
from collections import defaultdict
from dataclasses import dataclass, field

import numpy as np

from .clustering import build_hierarchy
from .confusion import ConfusionCounts, NormalizedConfusion, column_normalize, sum_folds
from .errors import UnknownPhoneme, UnknownWord
from .lexicon import UNMAPPED_ID, find_homophones, transcode
from .scoring import UNIT_COSTS, Transcript, align, score_transcripts

WORD_BOUNDARY = "sp"

# stream tags for derived generators
_SPLIT, _PHONE, _VISEME = 0, 1, 2


@dataclass
class ChannelModel:
    base_confusion: NormalizedConfusion
    noise_scale: float = 1.0
    dilution_exponent: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.noise_scale) or self.noise_scale < 0:
            raise ValueError("noise_scale must be finite and non-negative")
        if not np.isfinite(self.dilution_exponent) or self.dilution_exponent < 0:
            raise ValueError("dilution_exponent must be finite and non-negative")

    @classmethod
    def identity(cls, labels, **kw):
        n = len(labels)
        return cls(NormalizedConfusion(tuple(labels), np.eye(n)), **kw)

    @classmethod
    def uniform(cls, labels, **kw):
        n = len(labels)
        return cls(NormalizedConfusion(tuple(labels), np.full((n, n), 1.0 / n)), **kw)

    @property
    def labels(self):
        return self.base_confusion.labels

    def phoneme_matrix(self):
        """Row-stochastic ``Pr(hyp j | ref i)`` after noise scaling."""
        probs = self.base_confusion.probs
        n = len(self.labels)
        rows = probs.sum(axis=1)
        base = np.eye(n)
        seen = rows > 0
        base[seen] = probs[seen] / rows[seen, None]
        return _scale_errors(base, np.arange(n), self.noise_scale)

    def viseme_matrix(self, p2v, m0):
        """``Pr(hyp class | ref phoneme)`` over ``class_ids`` at one map.

        Phonemes the map does not cover fall into the reserved ``V00``
        class, which is appended only when needed.
        """
        class_ids = [c.id for c in p2v.classes]
        col = [p2v.phoneme_index.get(lab) for lab in self.labels]
        if any(c is None for c in col):
            class_ids.append(UNMAPPED_ID)
        pos = {cid: n for n, cid in enumerate(class_ids)}
        col = np.array([pos[c if c is not None else UNMAPPED_ID] for c in col])
        phon = self.phoneme_matrix()
        vis = np.zeros((len(self.labels), len(class_ids)))
        for j, c in enumerate(col):
            vis[:, c] += phon[:, j]
        factor = (len(p2v) / m0) ** self.dilution_exponent
        return class_ids, _scale_errors(vis, col, factor)


def _scale_errors(rows, correct, factor):
    """Multiply each row's off-target mass by ``factor`` (capped at 1)."""
    out = rows.copy()
    idx = np.arange(len(rows))
    hit = rows[idx, correct]
    err = 1.0 - hit
    new_err = np.minimum(1.0, err * factor)
    scale = np.divide(new_err, err, out=np.zeros_like(err), where=err > 1e-15)
    out *= scale[:, None]
    out[idx, correct] = 1.0 - new_err
    return out


def _cumulative(matrix):
    cum = np.cumsum(matrix, axis=1)
    cum[:, -1] = 1.0
    return cum


def _sample_rows(cum, ref_idx, rng):
    u = rng.random(len(ref_idx))
    return (u[:, None] < cum[ref_idx]).argmax(axis=1)


@dataclass
class SimulationConfig:
    seed: int = 0
    folds: int = 10
    test_size: int = 20

    def __post_init__(self):
        if self.folds < 1:
            raise ValueError("folds must be at least 1")
        if self.test_size < 1:
            raise ValueError("test_size must be at least 1")


def fold_splits(transcript, config):
    """Test utterance ids for each fold.

    Each fold draws its own test set without replacement; folds draw
    independently, so an utterance can be tested in several folds.
    """
    ids = list(transcript.utterances)
    if config.test_size >= len(ids):
        raise ValueError(
            f"test_size {config.test_size} must be below the {len(ids)} utterances available"
        )
    splits = []
    for fold in range(config.folds):
        rng = np.random.default_rng([config.seed, _SPLIT, fold])
        picks = np.sort(rng.choice(len(ids), size=config.test_size, replace=False))
        splits.append([ids[p] for p in picks])
    return splits


def _utterance_phonemes(dictionary, words):
    """Phonemes of the first pronunciation of each word, with boundaries."""
    out = []
    for n, word in enumerate(words):
        if word not in dictionary:
            raise UnknownWord(f"{word!r} not in dictionary")
        if n:
            out.append(WORD_BOUNDARY)
        out.extend(dictionary[word][0])
    return out


def _reference_indices(phones, lookup):
    idx = []
    for ph in phones:
        if ph == WORD_BOUNDARY:
            continue
        try:
            idx.append(lookup[ph])
        except KeyError:
            raise UnknownPhoneme(f"channel does not cover {ph!r}") from None
    return np.array(idx, dtype=int)


def _with_boundaries(phones, symbols):
    out = []
    it = iter(symbols)
    for ph in phones:
        out.append(WORD_BOUNDARY if ph == WORD_BOUNDARY else next(it))
    return out


def simulate_phoneme_recognition(dictionary, transcript, channel, config, splits=None):
    """Recognise each fold's test utterances at the phoneme level.

    Returns a hypothesis transcript keyed ``f<fold>/<utt>`` and one
    confusion matrix per fold over the channel's labels.
    """
    splits = splits if splits is not None else fold_splits(transcript, config)
    labels = channel.labels
    lookup = {lab: n for n, lab in enumerate(labels)}
    cum = _cumulative(channel.phoneme_matrix())
    hyp = Transcript()
    folds = []
    for fold, utts in enumerate(splits):
        rng = np.random.default_rng([config.seed, _PHONE, fold])
        counts = np.zeros((len(labels), len(labels)), dtype=np.int64)
        for utt in utts:
            phones = _utterance_phonemes(dictionary, transcript.utterances[utt])
            ref = _reference_indices(phones, lookup)
            out = _sample_rows(cum, ref, rng)
            np.add.at(counts, (ref, out), 1)
            hyp.add(f"f{fold + 1:02d}/{utt}", _with_boundaries(phones, [labels[o] for o in out]))
        folds.append(ConfusionCounts(labels, counts))
    return hyp, folds


class WordDecoder:
    """Nearest-entry word lookup over a viseme lexicon."""

    def __init__(self, lexicon):
        if not lexicon.entries:
            raise ValueError("empty lexicon")
        self.by_seq = defaultdict(list)
        for word, seqs in lexicon.entries.items():
            for seq in seqs:
                if word not in self.by_seq[seq]:
                    self.by_seq[seq].append(word)

    def candidates(self, seq):
        seq = tuple(seq)
        exact = self.by_seq.get(seq)
        if exact:
            return exact
        best, words = None, []
        for entry, ws in self.by_seq.items():
            c = align(entry, seq, UNIT_COSTS)
            cost = c.s + c.d + c.i
            if best is None or cost < best:
                best, words = cost, list(ws)
            elif cost == best:
                words.extend(w for w in ws if w not in words)
        return words

    def decode(self, seq, rng):
        words = self.candidates(seq)
        return words[0] if len(words) == 1 else words[rng.integers(len(words))]


def _segments(tokens):
    seg = []
    for tok in tokens:
        if tok == WORD_BOUNDARY:
            if seg:
                yield seg
            seg = []
        else:
            seg.append(tok)
    if seg:
        yield seg


def decode_words(viseme_transcript, lexicon, rng, decoder=None):
    decoder = decoder or WordDecoder(lexicon)
    out = Transcript()
    for utt, tokens in viseme_transcript:
        out.add(utt, [decoder.decode(seg, rng) for seg in _segments(tokens)])
    return out


@dataclass
class SweepRow:
    m: int
    correctness: float
    accuracy: float
    homophone_groups: int
    stderr_c: float
    fold_correctness: list = field(default_factory=list, repr=False)


@dataclass
class SweepResult:
    rows: list
    speaker_id: str
    seed: int
    hierarchy: object = field(default=None, repr=False)

    def to_csv(self, version=None):
        out = io.StringIO()
        if version is not None:
            out.write(f"# p2v {version} sweep speaker={self.speaker_id} seed={self.seed}\n")
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["M", "C", "A", "homophone_groups", "stderr_C"])
        for r in self.rows:
            w.writerow(
                [r.m, f"{r.correctness:.6f}", f"{r.accuracy:.6f}", r.homophone_groups, f"{r.stderr_c:.6f}"]
            )
        return out.getvalue()


def simulate_level(dictionary, transcript, channel, p2v, m0, utts, rng, decoder):
    """Viseme recognition plus word decoding of ``utts`` at one map."""
    class_ids, matrix = channel.viseme_matrix(p2v, m0)
    cum = _cumulative(matrix)
    lookup = {lab: n for n, lab in enumerate(channel.labels)}
    ref = Transcript()
    hyp = Transcript()
    for utt in utts:
        words = transcript.utterances[utt]
        phones = _utterance_phonemes(dictionary, words)
        out = _sample_rows(cum, _reference_indices(phones, lookup), rng)
        visemes = _with_boundaries(phones, [class_ids[o] for o in out])
        ref.add(utt, words)
        hyp.add(utt, [decoder.decode(seg, rng) for seg in _segments(visemes)])
    return score_transcripts(ref, hyp)


def sweep(channel, inventory, dictionary, transcript, config, counts=None, speaker_id=""):
    """Correctness against class count over the whole map hierarchy.

    Without ``counts`` the phoneme confusions are first simulated with
    ``channel`` on every fold and summed, so the clustering input is the
    recogniser's own output. Each row's C and A are means over folds.
    """
    splits = fold_splits(transcript, config)
    folds = config.folds
    if counts is None:
        _, per_fold = simulate_phoneme_recognition(dictionary, transcript, channel, config, splits)
        counts = sum_folds(per_fold)
    h = build_hierarchy(counts, inventory, seed=config.seed, speaker_id=speaker_id, folds=folds)
    rows = []
    for m in h.levels:
        p2v = h.maps[m]
        lexicon = transcode(dictionary, p2v, strict=False)
        groups = len(find_homophones(lexicon).groups)
        decoder = WordDecoder(lexicon)
        cs, accs = [], []
        for fold, utts in enumerate(splits):
            rng = np.random.default_rng([config.seed, _VISEME, m, fold])
            report = simulate_level(dictionary, transcript, channel, p2v, h.initial_classes, utts, rng, decoder)
            cs.append(report.correctness)
            accs.append(report.accuracy)
        stderr = float(np.std(cs, ddof=1) / np.sqrt(folds)) if folds > 1 else 0.0
        rows.append(SweepRow(m, float(np.mean(cs)), float(np.mean(accs)), groups, stderr, cs))
    return SweepResult(rows, speaker_id, config.seed, h)


def channel_from_counts(counts, noise_scale=1.0, dilution_exponent=1.0):
    return ChannelModel(column_normalize(counts), noise_scale, dilution_exponent)
