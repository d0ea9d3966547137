"""Speaker-dependent phoneme-to-viseme maps from phoneme confusions.

The package derives a nested family of phoneme-to-viseme (P2V) maps by
greedily merging the most confused pair of same-category classes, pushes
pronunciation dictionaries through those maps, counts the visual homophones
that result, and scores word transcripts by correctness and accuracy.
"""

__version__ = "0.1.0"
