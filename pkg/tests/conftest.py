from importlib import resources

import numpy as np
import pytest

from p2v.confusion import ConfusionCounts, parse_confusion_csv
from p2v.inventory import Category, Phoneme, PhonemeInventory, default_inventory
from p2v.lexicon import parse_dictionary, parse_map
from p2v.scoring import parse_transcript


def bundled(name):
    return resources.files("p2v.data").joinpath(name).read_text()


def data_path(name):
    return str(resources.files("p2v.data").joinpath(name))


@pytest.fixture(scope="session")
def inventory():
    return default_inventory()


@pytest.fixture(scope="session")
def toy_dict(inventory):
    return parse_dictionary(bundled("toy_beep.dic"), inventory)


@pytest.fixture(scope="session")
def toy_transcript():
    return parse_transcript(bundled("toy_transcript.txt"))


@pytest.fixture(scope="session")
def toy_counts():
    return parse_confusion_csv(bundled("toy_confusion.csv"))


@pytest.fixture(scope="session")
def ten_class_map(inventory):
    return parse_map(bundled("speaker01_10.map"), inventory)


def small_inventory(n_vowels, n_consonants):
    phonemes = [Phoneme(f"v{i}", Category.VOWEL) for i in range(n_vowels)]
    phonemes += [Phoneme(f"c{i}", Category.CONSONANT) for i in range(n_consonants)]
    return PhonemeInventory(tuple(phonemes))


def random_counts(rng, labels, high=20):
    n = len(labels)
    return ConfusionCounts(tuple(labels), rng.integers(0, high, size=(n, n)) + np.eye(n, dtype=int) * high)


ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name, (ok, detail) in ACCEPTANCE.items():
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}  {detail}")
