"""Phoneme alphabet with its vowel/consonant split.

Category files are line oriented::

    # label category
    ax V
    f  C

Labels are lowercased on parse. Silence symbols are not phonemes and are
refused outright.
"""

import enum
from dataclasses import dataclass, field
from importlib import resources

from .errors import (
    DuplicatePhoneme,
    EmptyInventory,
    InvalidCategory,
    SilenceSymbol,
    UnknownPhoneme,
)

SILENCE = frozenset({"sil", "sp"})
DEFAULT_INVENTORY = "phonemes_beep46.txt"


class Category(enum.Enum):
    VOWEL = "V"
    CONSONANT = "C"

    def __str__(self):
        return self.value


@dataclass(frozen=True)
class Phoneme:
    label: str
    category: Category


@dataclass(frozen=True)
class PhonemeInventory:
    phonemes: tuple
    index: dict = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        index = {}
        for pos, ph in enumerate(self.phonemes):
            if ph.label in index:
                raise DuplicatePhoneme(f"duplicate phoneme {ph.label!r}")
            index[ph.label] = pos
        object.__setattr__(self, "index", index)

    def __len__(self):
        return len(self.phonemes)

    def __iter__(self):
        return iter(self.phonemes)

    def __contains__(self, label):
        return label in self.index

    @property
    def labels(self):
        return [ph.label for ph in self.phonemes]

    def category(self, label):
        try:
            return self.phonemes[self.index[label]].category
        except KeyError:
            raise UnknownPhoneme(f"phoneme {label!r} not in inventory") from None

    def vowels(self):
        return [p.label for p in self.phonemes if p.category is Category.VOWEL]

    def consonants(self):
        return [p.label for p in self.phonemes if p.category is Category.CONSONANT]


def parse_category_file(text, source=None):
    phonemes = []
    seen = set()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        fields = line.split()
        if len(fields) != 2:
            raise InvalidCategory(
                f"expected '<label> <V|C>', got {raw.strip()!r}", lineno, source
            )
        label, cat = fields[0].lower(), fields[1].upper()
        if label in SILENCE:
            raise SilenceSymbol(f"{label!r} is a silence symbol, not a phoneme", lineno, source)
        if cat not in ("V", "C"):
            raise InvalidCategory(f"bad category {fields[1]!r} for {label!r}", lineno, source)
        if label in seen:
            raise DuplicatePhoneme(f"duplicate phoneme {label!r}", lineno, source)
        seen.add(label)
        phonemes.append(Phoneme(label, Category(cat)))
    if not phonemes:
        raise EmptyInventory("category file defines no phonemes", None, source)
    return PhonemeInventory(tuple(phonemes))


def serialize_category_file(inv):
    return "".join(f"{ph.label} {ph.category}\n" for ph in inv)


def default_inventory():
    """The bundled 46-label British English inventory."""
    text = resources.files("p2v.data").joinpath(DEFAULT_INVENTORY).read_text()
    return parse_category_file(text, source=DEFAULT_INVENTORY)


@dataclass
class CoverageReport:
    unknown: list
    unused: list

    @property
    def ok(self):
        return not self.unknown


def validate_dictionary_coverage(inv, dictionary, strict=False):
    """Compare the phonemes a dictionary uses with an inventory.

    ``unknown`` lists dictionary phonemes missing from the inventory in
    first-use order; ``unused`` lists inventory phonemes never used, in
    inventory order. With ``strict`` an unknown phoneme raises instead.
    """
    used = {}
    for prons in dictionary.entries.values():
        for pron in prons:
            for ph in pron:
                used.setdefault(ph, None)
    unknown = [ph for ph in used if ph not in inv]
    if strict and unknown:
        raise UnknownPhoneme(f"phonemes not in inventory: {' '.join(unknown)}")
    unused = [label for label in inv.labels if label not in used]
    return CoverageReport(unknown=unknown, unused=unused)
