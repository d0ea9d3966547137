"""Pronunciation dictionaries, P2V map files, transcoding and homophones.

A P2V map file has one viseme class per line, id first::

    V04 f zh w
    V05 k b d th p

Slashes around phonemes (``/f/``) are tolerated on input and never written.
Class ids are case-insensitive on input; ``v5`` reads as ``V05``.
"""

import csv
import io
import re
from collections import defaultdict
from dataclasses import dataclass, field

from .errors import (
    DuplicateClass,
    EmptyPronunciation,
    OverlappingClasses,
    ParseError,
    UnknownPhoneme,
    UnmappedPhoneme,
)
from .inventory import Category

UNMAPPED_ID = "V00"

_VISEME_ID = re.compile(r"[vV](\d+)")


def normalize_class_id(token):
    m = _VISEME_ID.fullmatch(token)
    if m:
        return f"V{int(m.group(1)):02d}"
    return token.upper()


@dataclass
class PronunciationDictionary:
    entries: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.entries)

    def __contains__(self, word):
        return word.upper() in self.entries

    def __getitem__(self, word):
        return self.entries[word.upper()]

    def add(self, word, pron):
        pron = tuple(ph.lower() for ph in pron)
        if not pron:
            raise EmptyPronunciation(f"{word!r} has an empty pronunciation")
        self.entries.setdefault(word.upper(), []).append(pron)

    def phonemes(self):
        seen = {}
        for prons in self.entries.values():
            for pron in prons:
                for ph in pron:
                    seen.setdefault(ph, None)
        return list(seen)


def parse_dictionary(text, inventory=None, source=None):
    """Parse ``WORD  ph ph ph`` lines; repeated words add alternates.

    With an ``inventory`` every phoneme is checked against it.
    """
    d = PronunciationDictionary()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        word, *phones = line.split()
        if not phones:
            raise EmptyPronunciation(f"{word!r} has no phonemes", lineno, source)
        phones = [p.lower() for p in phones]
        if inventory is not None:
            for ph in phones:
                if ph not in inventory:
                    raise UnknownPhoneme(f"{source or 'line'} {lineno}: {ph!r} not in inventory")
        d.add(word, phones)
    return d


def serialize_dictionary(d):
    return "".join(
        f"{word}  {' '.join(pron)}\n" for word, prons in d.entries.items() for pron in prons
    )


@dataclass(frozen=True)
class VisemeClass:
    id: str
    members: tuple
    category: Category = None


@dataclass
class P2VMap:
    classes: list
    phoneme_index: dict = field(init=False, repr=False)

    def __post_init__(self):
        ids = set()
        index = {}
        for cls in self.classes:
            if cls.id in ids:
                raise DuplicateClass(f"duplicate class id {cls.id}")
            ids.add(cls.id)
            if not cls.members:
                raise ParseError(f"class {cls.id} is empty")
            for ph in cls.members:
                if ph in index:
                    raise OverlappingClasses(f"{ph!r} is in both {index[ph]} and {cls.id}")
                index[ph] = cls.id
        self.phoneme_index = index

    def __len__(self):
        return len(self.classes)

    def __getitem__(self, class_id):
        for cls in self.classes:
            if cls.id == class_id:
                return cls
        raise KeyError(class_id)

    def partition(self):
        """The map as a set of member sets, ids ignored."""
        return frozenset(frozenset(c.members) for c in self.classes)

    @classmethod
    def identity(cls, labels, inventory=None):
        classes = [
            VisemeClass(
                f"V{n:02d}", (lab,), inventory.category(lab) if inventory is not None else None
            )
            for n, lab in enumerate(labels, 1)
        ]
        return cls(classes)


def parse_map(text, inventory=None, source=None):
    classes = []
    ids = {}
    owner = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        head, *members = line.split()
        cid = normalize_class_id(head)
        members = tuple(m.strip("/").lower() for m in members if m.strip("/"))
        if not members:
            raise ParseError(f"class {cid} has no phonemes", lineno, source)
        if cid in ids:
            raise DuplicateClass(f"class {cid} already defined on line {ids[cid]}", lineno, source)
        ids[cid] = lineno
        for ph in members:
            if ph in owner:
                raise OverlappingClasses(f"{ph!r} already in class {owner[ph]}", lineno, source)
            owner[ph] = cid
        category = None
        if inventory is not None:
            cats = {inventory.category(ph) for ph in members}
            if len(cats) > 1:
                raise ParseError(f"class {cid} mixes vowels and consonants", lineno, source)
            category = cats.pop()
        classes.append(VisemeClass(cid, members, category))
    return P2VMap(classes)


def serialize_map(m, header=None):
    lines = [f"# {h}\n" for h in (header or [])]
    lines += [f"{c.id} {' '.join(c.members)}\n" for c in m.classes]
    return "".join(lines)


@dataclass
class VisemeLexicon:
    entries: dict
    source_map: str = ""

    def __len__(self):
        return len(self.entries)


def transcode(d, m, strict=True, source_map=""):
    """Replace every phoneme by its class id, one symbol per phoneme.

    Uncovered phonemes raise :class:`UnmappedPhoneme` in strict mode and
    become ``V00`` otherwise.
    """
    index = m.phoneme_index
    entries = {}
    for word, prons in d.entries.items():
        out = []
        for pron in prons:
            seq = []
            for ph in pron:
                cid = index.get(ph)
                if cid is None:
                    if strict:
                        raise UnmappedPhoneme(f"{ph!r} in {word} is not covered by the map")
                    cid = UNMAPPED_ID
                seq.append(cid)
            out.append(tuple(seq))
        entries[word] = out
    return VisemeLexicon(entries, source_map)


def serialize_lexicon(lex):
    return "".join(
        f"{word}  {' '.join(seq)}\n" for word, seqs in lex.entries.items() for seq in seqs
    )


@dataclass
class HomophoneReport:
    groups: list
    total_homophonous_words: int
    distinct_words: int

    def to_csv(self):
        out = io.StringIO()
        w = csv.writer(out, lineterminator="\n")
        w.writerow(["viseme_seq", "words", "count"])
        for seq, words in self.groups:
            w.writerow([" ".join(seq), " ".join(words), len(words)])
        return out.getvalue()

    def summary(self):
        lines = [
            f"words: {self.distinct_words}",
            f"homophone groups: {len(self.groups)}",
            f"homophonous words: {self.total_homophonous_words}",
        ]
        lines += [f"  {' '.join(seq)}: {' '.join(words)}" for seq, words in self.groups]
        return "\n".join(lines) + "\n"


def find_homophones(lex):
    """Group different words that share a viseme sequence.

    A group is keyed by the shared sequence, so a word with two homophonous
    pronunciations can sit in two groups. Alternates of one word never make
    a group on their own.
    """
    by_seq = defaultdict(list)
    for word, seqs in lex.entries.items():
        for seq in dict.fromkeys(seqs):
            by_seq[tuple(seq)].append(word)
    groups = [(seq, tuple(words)) for seq, words in by_seq.items() if len(words) > 1]
    groups.sort(key=lambda g: (g[0], g[1]))
    homophonous = {w for _, words in groups for w in words}
    return HomophoneReport(groups, len(homophonous), len(lex.entries))
