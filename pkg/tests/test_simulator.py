import numpy as np
import pytest

from oracles import expected_decodability
from p2v.clustering import build_hierarchy
from p2v.confusion import NormalizedConfusion, sum_folds
from p2v.errors import UnknownWord
from p2v.lexicon import P2VMap, PronunciationDictionary, parse_dictionary, parse_map, transcode
from p2v.scoring import Transcript, parse_transcript, score_transcripts
from p2v.simulator import (
    ChannelModel,
    SimulationConfig,
    WordDecoder,
    channel_from_counts,
    decode_words,
    fold_splits,
    simulate_phoneme_recognition,
    sweep,
)


def one_word_transcript(words):
    return Transcript({f"u{n:04d}": (w,) for n, w in enumerate(words)})


def test_fold_splits_deterministic_and_sized(toy_transcript):
    cfg = SimulationConfig(seed=4)
    a, b = fold_splits(toy_transcript, cfg), fold_splits(toy_transcript, cfg)
    assert a == b
    assert len(a) == 10 and all(len(set(f)) == 20 for f in a)
    assert fold_splits(toy_transcript, SimulationConfig(seed=5)) != a


def test_test_size_must_leave_training_data(toy_transcript):
    with pytest.raises(ValueError):
        fold_splits(toy_transcript, SimulationConfig(test_size=200))


def test_identity_channel_is_perfect(toy_dict, toy_transcript):
    channel = ChannelModel.identity(sorted(toy_dict.phonemes()))
    hyp, folds = simulate_phoneme_recognition(toy_dict, toy_transcript, channel, SimulationConfig())
    for key, tokens in hyp:
        utt = key.split("/", 1)[1]
        words = toy_transcript.utterances[utt]
        assert list(tokens) == [p for w in words for p in toy_dict[w][0]]
    total = sum_folds(folds).counts
    assert np.count_nonzero(total - np.diag(np.diag(total))) == 0
    assert total.sum() == sum(len(t) for _, t in hyp)


def test_deterministic_substitution():
    labels = ("p", "b", "aa")
    probs = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]], dtype=float)
    channel = ChannelModel(NormalizedConfusion(labels, probs))
    d = parse_dictionary("PA p aa\nBA b aa\n")
    t = one_word_transcript(["PA"] * 5 + ["BA"] * 5)
    hyp, _ = simulate_phoneme_recognition(d, t, channel, SimulationConfig(folds=2, test_size=9))
    for key, tokens in hyp:
        ref = t.utterances[key.split("/", 1)[1]][0]
        assert tokens == (("b", "aa") if ref == "PA" else ("p", "aa"))


def test_uniform_channel_within_three_sigma():
    labels = ("a", "b", "c", "d")
    channel = ChannelModel.uniform(labels)
    d = parse_dictionary("W a b c d a b c d a b\n")
    t = one_word_transcript(["W"] * 1001)
    _, folds = simulate_phoneme_recognition(d, t, channel, SimulationConfig(folds=1, test_size=1000))
    counts = folds[0].counts
    assert counts.sum() == 10_000
    for row in counts:
        n = row.sum()
        sigma = np.sqrt(n * 0.25 * 0.75)
        assert np.all(np.abs(row - n / 4) <= 3 * sigma)


def test_noise_scale_zero_is_perfect(toy_counts):
    channel = channel_from_counts(toy_counts, noise_scale=0, dilution_exponent=1)
    assert np.array_equal(channel.phoneme_matrix(), np.eye(46))


def test_noise_scale_one_is_base_rows(toy_counts):
    channel = channel_from_counts(toy_counts, noise_scale=1)
    probs = channel.base_confusion.probs
    rows = probs.sum(axis=1)
    m = channel.phoneme_matrix()
    seen = rows > 0
    assert np.allclose(m[seen], probs[seen] / rows[seen, None])


def test_viseme_matrix_rows_and_dilution(toy_counts, inventory):
    h = build_hierarchy(toy_counts, inventory)
    channel = channel_from_counts(toy_counts, 1, 1)
    flat = channel_from_counts(toy_counts, 1, 0)
    for m in (45, 20, 2):
        ids, diluted = channel.viseme_matrix(h[m], 45)
        _, undiluted = flat.viseme_matrix(h[m], 45)
        assert np.allclose(diluted.sum(axis=1), 1)
        assert ids[-1] == "V00"  # ix is not in any map
        hits = [diluted[i, ids.index(h[m].phoneme_index.get(lab, "V00"))] for i, lab in enumerate(channel.labels)]
        hits0 = [undiluted[i, ids.index(h[m].phoneme_index.get(lab, "V00"))] for i, lab in enumerate(channel.labels)]
        err, err0 = 1 - np.array(hits), 1 - np.array(hits0)
        assert np.allclose(err, np.minimum(1, err0 * m / 45))


def test_unknown_word(toy_dict):
    channel = ChannelModel.identity(sorted(toy_dict.phonemes()))
    t = one_word_transcript(["PORT", "NOPE", "BASS"])
    with pytest.raises(UnknownWord):
        simulate_phoneme_recognition(toy_dict, t, channel, SimulationConfig(folds=1, test_size=2, seed=0))


def test_decode_noiseless_unique():
    d = parse_dictionary("A p aa\nB b iy\nC m aa p\n")
    lex = transcode(d, parse_map("V1 p\nV2 b\nV3 m\nV4 aa\nV5 iy\n"))
    vis = Transcript({w: lex.entries[w][0] for w in lex.entries})
    out = decode_words(vis, lex, np.random.default_rng(0))
    assert out.utterances == {"A": ("A",), "B": ("B",), "C": ("C",)}


def test_decode_nearest_and_boundaries():
    lex = transcode(parse_dictionary("A p aa\nB b iy iy\n"), parse_map("V1 p\nV2 b\nV3 aa\nV4 iy\n"))
    vis = Transcript({"u": ("V01", "V04", "sp", "V02", "V04")})
    out = decode_words(vis, lex, np.random.default_rng(0))
    assert out.utterances["u"] == ("A", "B")


def test_homophone_pair_coin_flip(toy_dict, ten_class_map):
    d = PronunciationDictionary({w: toy_dict[w] for w in ("PORT", "BASS")})
    lex = transcode(d, ten_class_map)
    decoder = WordDecoder(lex)
    seq = lex.entries["PORT"][0]
    rng = np.random.default_rng(123)
    trials = 2000
    words = ["PORT", "BASS"] * (trials // 2)
    hits = sum(decoder.decode(seq, rng) == w for w in words)
    # binomial(2000, 0.5): sd = sqrt(2000 * 0.25)
    assert abs(hits - trials / 2) <= 3 * np.sqrt(trials * 0.25)


def test_two_class_map_collapses_toward_chance(toy_dict, toy_counts, inventory):
    words = list(toy_dict.entries)[:20]
    d = PronunciationDictionary({w: toy_dict[w] for w in words})
    h = build_hierarchy(toy_counts, inventory)
    p2v = h[2]
    lex = transcode(d, p2v, strict=False)
    expected = expected_decodability(d, p2v, words)
    decoder = WordDecoder(lex)
    rng = np.random.default_rng(9)
    reps = 200
    credits = [
        [decoder.decode(lex.entries[w][0], rng) == w for _ in range(reps)] for w in words
    ]
    mean = np.mean(credits)
    per_word = np.array([1 / len(decoder.candidates(lex.entries[w][0])) for w in words])
    sd = np.sqrt(np.sum(per_word * (1 - per_word) * reps)) / (reps * len(words))
    assert abs(mean - expected) <= 3 * sd
    top = expected_decodability(d, h[h.initial_classes], words)
    assert top == 1.0 and expected < top


def run_sweep(toy_dict, toy_transcript, inventory, base, noise, dilution, seed=0, folds=10, **kw):
    channel = channel_from_counts(base, noise, dilution)
    return sweep(channel, inventory, toy_dict, toy_transcript, SimulationConfig(seed=seed, folds=folds), **kw)


def test_sweep_rows(toy_dict, toy_transcript, inventory, toy_counts):
    r = run_sweep(toy_dict, toy_transcript, inventory, toy_counts, 0, 0, counts=toy_counts)
    assert [row.m for row in r.rows] == list(range(45, 1, -1))
    assert r.rows[0].correctness == 1.0 and r.rows[0].homophone_groups == 0
    lines = r.to_csv(version="x").splitlines()
    assert lines[0].startswith("#") and "seed=0" in lines[0]
    assert lines[1] == "M,C,A,homophone_groups,stderr_C"
    assert len(lines) == 2 + 44


def test_identity_channel_top_level(toy_dict, toy_transcript, inventory, toy_counts):
    channel = ChannelModel.identity(toy_counts.labels)
    r = sweep(channel, inventory, toy_dict, toy_transcript, SimulationConfig(seed=1), counts=toy_counts)
    assert r.rows[0].m == 45 and r.rows[0].correctness == 1.0


def test_zero_noise_matches_closed_form_per_fold(toy_dict, toy_transcript, inventory, toy_counts):
    # with a perfect recogniser each fold's C is the mean 1/k credit of its
    # words up to coin flips; levels without homophones are exact
    r = run_sweep(toy_dict, toy_transcript, inventory, toy_counts, 0, 0, counts=toy_counts)
    splits = fold_splits(toy_transcript, SimulationConfig(seed=0))
    for row in r.rows:
        p2v = r.hierarchy[row.m]
        for fold, c in zip(splits, row.fold_correctness):
            words = [toy_transcript.utterances[u][0] for u in fold]
            exp = expected_decodability(toy_dict, p2v, words)
            if exp == 1.0:
                assert c == 1.0


def test_default_dilution_drops_at_two_classes(toy_dict, toy_transcript, inventory, toy_counts):
    r = run_sweep(toy_dict, toy_transcript, inventory, toy_counts, 1, 1, counts=toy_counts)
    by_m = {row.m: row.correctness for row in r.rows}
    assert by_m[2] < by_m[45]
    assert all(0 <= row.accuracy <= row.correctness <= 1 for row in r.rows)
    assert all(row.stderr_c >= 0 for row in r.rows)


def test_self_consistent_sweep_clusters_its_own_output(toy_dict, toy_transcript, inventory, toy_counts):
    channel = channel_from_counts(toy_counts, 1, 1)
    cfg = SimulationConfig(seed=7, folds=3)
    r = sweep(channel, inventory, toy_dict, toy_transcript, cfg)
    _, folds = simulate_phoneme_recognition(toy_dict, toy_transcript, channel, cfg)
    again = build_hierarchy(sum_folds(folds), inventory, seed=7)
    assert [s.merged_pair for s in r.hierarchy.trace] == [s.merged_pair for s in again.trace]
    assert r.hierarchy.folds == 3


def test_sweep_deterministic(toy_dict, toy_transcript, inventory, toy_counts):
    a = run_sweep(toy_dict, toy_transcript, inventory, toy_counts, 1, 1, seed=3, folds=3, counts=toy_counts)
    b = run_sweep(toy_dict, toy_transcript, inventory, toy_counts, 1, 1, seed=3, folds=3, counts=toy_counts)
    c = run_sweep(toy_dict, toy_transcript, inventory, toy_counts, 1, 1, seed=4, folds=3, counts=toy_counts)
    assert a.to_csv("v") == b.to_csv("v")
    assert a.to_csv("v") != c.to_csv("v")


def test_channel_rejects_bad_parameters(toy_counts):
    with pytest.raises(ValueError):
        channel_from_counts(toy_counts, noise_scale=-1)
    with pytest.raises(ValueError):
        channel_from_counts(toy_counts, dilution_exponent=float("nan"))
