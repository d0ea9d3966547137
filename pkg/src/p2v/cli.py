"""Command line entry point: ``p2v <subcommand> ...``.

Exit codes: 0 success, 2 bad input, 3 nothing to cluster, 4 undefined
score. Outputs are staged in a temporary location and only moved into
place once complete.
"""

import argparse
import logging
import os
import shutil
import sys
import tempfile
from importlib import resources

from . import __version__
from .clustering import build_hierarchy, write_hierarchy
from .confusion import parse_confusion_csv, parse_hresults, sum_folds
from .errors import NothingToCluster, P2VError, UndefinedScore
from .inventory import default_inventory, parse_category_file, validate_dictionary_coverage
from .lexicon import find_homophones, parse_dictionary, parse_map, serialize_lexicon, transcode
from .scoring import HTK_COSTS, parse_transcript, score_transcripts
from .simulator import SimulationConfig, channel_from_counts, sweep

log = logging.getLogger("p2v")

TOY_FILES = {
    "dictionary": "toy_beep.dic",
    "transcript": "toy_transcript.txt",
    "confusion": "toy_confusion.csv",
}


def _read(path):
    with open(path) as f:
        return f.read()


def _bundled(name):
    return resources.files("p2v.data").joinpath(name).read_text()


def _inventory(args):
    if args.categories:
        return parse_category_file(_read(args.categories), source=args.categories)
    return default_inventory()


def _confusion(path, fmt):
    text = _read(path)
    if fmt == "hresults":
        return parse_hresults(text, source=path)
    return parse_confusion_csv(text, source=path)


def _write_atomic(path, text):
    if path in (None, "-"):
        sys.stdout.write(text)
        return
    d = os.path.dirname(os.path.abspath(path))
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".p2v-")
    try:
        with os.fdopen(fd, "w") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _publish_dir(staging, out_dir):
    os.makedirs(out_dir, exist_ok=True)
    for name in sorted(os.listdir(staging)):
        os.replace(os.path.join(staging, name), os.path.join(out_dir, name))


def _parse_costs(text):
    try:
        sub, dele, ins = (int(v) for v in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("costs must be three integers: sub,del,ins") from None
    if min(sub, dele, ins) <= 0:
        raise argparse.ArgumentTypeError("costs must be positive")
    return {"sub": sub, "del": dele, "ins": ins}


def cmd_cluster(args):
    inv = _inventory(args)
    folds = [_confusion(path, args.format) for path in args.confusion]
    counts = sum_folds(folds)
    h = build_hierarchy(counts, inv, seed=args.seed, speaker_id=args.speaker, folds=len(folds))
    parent = os.path.dirname(os.path.abspath(args.out_dir))
    os.makedirs(parent, exist_ok=True)
    staging = tempfile.mkdtemp(dir=parent, prefix=".p2v-")
    try:
        write_hierarchy(h, staging)
        _publish_dir(staging, args.out_dir)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    log.info("wrote %d maps (M=%d..%d) to %s", len(h.maps), h.levels[0], h.levels[-1], args.out_dir)
    return 0


def _dict_and_map(args):
    inv = _inventory(args)
    d = parse_dictionary(_read(args.dict), source=args.dict)
    m = parse_map(_read(args.map), inv, source=args.map)
    return d, m


def cmd_transcode(args):
    d, m = _dict_and_map(args)
    lex = transcode(d, m, strict=args.strict)
    _write_atomic(args.output, serialize_lexicon(lex))
    return 0


def cmd_homophones(args):
    d, m = _dict_and_map(args)
    report = find_homophones(transcode(d, m, strict=args.strict))
    if args.csv:
        _write_atomic(args.csv, report.to_csv())
    if args.csv != "-":
        sys.stdout.write(report.summary())
    return 0


def cmd_score(args):
    ref = parse_transcript(_read(args.ref), source=args.ref)
    hyp = parse_transcript(_read(args.hyp), source=args.hyp)
    report = score_transcripts(ref, hyp, args.costs)
    print(report.line())
    if args.csv:
        _write_atomic(args.csv, report.to_csv())
    if args.per_utterance:
        _write_atomic(args.per_utterance, report.per_utterance_csv())
    return 0


def cmd_sweep(args):
    inv = _inventory(args)
    if args.toy:
        dict_text, dict_src = _bundled(TOY_FILES["dictionary"]), TOY_FILES["dictionary"]
        tr_text, tr_src = _bundled(TOY_FILES["transcript"]), TOY_FILES["transcript"]
    else:
        if not (args.dict and args.transcript):
            raise P2VError("sweep needs --dict and --transcript (or --toy)")
        dict_text, dict_src = _read(args.dict), args.dict
        tr_text, tr_src = _read(args.transcript), args.transcript
    dictionary = parse_dictionary(dict_text, inv, source=dict_src)
    transcript = parse_transcript(tr_text, source=tr_src)

    if args.channel:
        counts = None
        base = _confusion(args.channel, args.format)
    elif args.confusion:
        counts = base = sum_folds(_confusion(p, args.format) for p in args.confusion)
    elif args.toy:
        counts = base = parse_confusion_csv(_bundled(TOY_FILES["confusion"]), source=TOY_FILES["confusion"])
    else:
        raise P2VError("sweep needs --confusion or --channel (or --toy)")
    channel = channel_from_counts(base, args.noise, args.dilution)

    outputs = []
    for n in range(args.seeds):
        seed = args.seed + n
        config = SimulationConfig(seed=seed, folds=args.folds, test_size=args.test_size)
        result = sweep(channel, inv, dictionary, transcript, config, counts=counts, speaker_id=args.speaker)
        outputs.append((seed, result.to_csv(version=__version__)))

    if args.seeds == 1 and not args.out_dir:
        _write_atomic(args.output, outputs[0][1])
        return 0
    out_dir = args.out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    staging = tempfile.mkdtemp(dir=out_dir, prefix=".p2v-")
    try:
        for seed, text in outputs:
            with open(os.path.join(staging, f"sweep_seed{seed}.csv"), "w") as f:
                f.write(text)
        _publish_dir(staging, out_dir)
    finally:
        shutil.rmtree(staging, ignore_errors=True)
    return 0


def cmd_validate(args):
    inv = _inventory(args)
    d = parse_dictionary(_read(args.dict), source=args.dict)
    report = validate_dictionary_coverage(inv, d, strict=args.strict)
    print(f"unknown {len(report.unknown)}: {' '.join(report.unknown)}".rstrip())
    print(f"unused {len(report.unused)}: {' '.join(report.unused)}".rstrip())
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="p2v", description="Phoneme-to-viseme maps from phoneme confusions."
    )
    parser.add_argument("--version", action="version", version=f"p2v {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--categories", help="phoneme category file (default: bundled 46-phoneme set)")

    p = sub.add_parser("cluster", help="build the map hierarchy from confusion matrices")
    p.add_argument("confusion", nargs="+", help="confusion CSVs; several are summed as folds")
    common(p)
    p.add_argument("--format", choices=["csv", "hresults"], default="csv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--speaker", default="")
    p.add_argument("-o", "--out-dir", required=True)
    p.set_defaults(func=cmd_cluster)

    for name, func, help_ in [
        ("transcode", cmd_transcode, "rewrite a dictionary as viseme strings"),
        ("homophones", cmd_homophones, "list words sharing a viseme string"),
    ]:
        p = sub.add_parser(name, help=help_)
        p.add_argument("--dict", required=True)
        p.add_argument("--map", required=True)
        common(p)
        p.add_argument(
            "--lenient", dest="strict", action="store_false",
            help="map uncovered phonemes to V00 instead of failing",
        )
        if name == "transcode":
            p.add_argument("-o", "--output", default="-")
        else:
            p.add_argument("--csv", help="write viseme_seq,words,count CSV here ('-' for stdout)")
        p.set_defaults(func=func)

    p = sub.add_parser("score", help="correctness and accuracy of a hypothesis transcript")
    p.add_argument("ref")
    p.add_argument("hyp")
    p.add_argument("--costs", type=_parse_costs, default=dict(HTK_COSTS), help="sub,del,ins (default 10,7,7)")
    p.add_argument("--csv", help="write N,H,S,D,I,C,A here")
    p.add_argument("--per-utterance", help="write per-utterance counts here")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("sweep", help="simulated word correctness for every map size")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--confusion", nargs="+", help="measured confusion CSVs: clustered directly")
    src.add_argument("--channel", help="confusion CSV used only as the simulated recogniser")
    p.add_argument("--toy", action="store_true", help="use the bundled toy dictionary/transcript/confusions")
    p.add_argument("--dict")
    p.add_argument("--transcript")
    common(p)
    p.add_argument("--format", choices=["csv", "hresults"], default="csv")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--seeds", type=int, default=1, help="run this many consecutive seeds")
    p.add_argument("--folds", type=int, default=10)
    p.add_argument("--test-size", type=int, default=20)
    p.add_argument("--noise", type=float, default=1.0)
    p.add_argument("--dilution", type=float, default=1.0)
    p.add_argument("--zero-noise", action="store_true", help="same as --noise 0 --dilution 0")
    p.add_argument("--speaker", default="")
    p.add_argument("-o", "--output", default="-")
    p.add_argument("--out-dir", help="write one sweep_seed<N>.csv per seed here")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("validate", help="check dictionary phonemes against the inventory")
    p.add_argument("--dict", required=True)
    common(p)
    p.add_argument("--strict", action="store_true")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    if getattr(args, "zero_noise", False):
        args.noise = args.dilution = 0.0
    try:
        return args.func(args)
    except NothingToCluster as e:
        print(f"p2v: {e}", file=sys.stderr)
        return 3
    except UndefinedScore as e:
        print(f"p2v: {e}", file=sys.stderr)
        return 4
    except (ValueError, OSError) as e:
        print(f"p2v: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
