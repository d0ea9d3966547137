"""Exception hierarchy.

Input problems derive from :class:`ParseError`, which carries an optional
source name and line number so the CLI can point at the offending line.
"""


class P2VError(ValueError):
    pass


class ParseError(P2VError):
    def __init__(self, message, line=None, source=None):
        super().__init__(message)
        self.message = message
        self.line = line
        self.source = source

    def __str__(self):
        where = self.source or ""
        if self.line is not None:
            where = f"{where}:{self.line}" if where else f"line {self.line}"
        return f"{where}: {self.message}" if where else self.message


# inventory
class DuplicatePhoneme(ParseError):
    pass


class InvalidCategory(ParseError):
    pass


class EmptyInventory(ParseError):
    pass


class SilenceSymbol(ParseError):
    pass


class UnknownPhoneme(P2VError):
    pass


# confusion
class LabelMismatch(ParseError):
    pass


class InvalidCount(ParseError):
    pass


class EmptyFoldSet(P2VError):
    pass


class UnknownLabel(P2VError):
    pass


class SelfMerge(P2VError):
    pass


# clustering
class NoLegalPair(P2VError):
    pass


class NothingToCluster(P2VError):
    pass


# lexicon
class EmptyPronunciation(ParseError):
    pass


class OverlappingClasses(ParseError):
    pass


class DuplicateClass(ParseError):
    pass


class UnmappedPhoneme(P2VError):
    pass


# scoring
class DuplicateUtterance(ParseError):
    pass


class MalformedLine(ParseError):
    pass


class UndefinedScore(P2VError):
    pass


class UnknownUtterance(P2VError):
    pass


# simulator
class UnknownWord(P2VError):
    pass
