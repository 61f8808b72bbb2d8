"""Text formats for profiles and elections, and result serialization.

Profile files::

    # comment
    candidates: c1, c2, c3
    800 : c1
    100 : c1, c2

Election files use ``vote: c1, c2`` lines instead, one per voter, in order.
"""

import json
import re
from dataclasses import dataclass
from decimal import Decimal
from fractions import Fraction

from .core import KPVoteError, Profile
from .distrat import Election

TOKEN_RE = re.compile(r"[A-Za-z0-9_-]+")
MULTIPLICITY_RE = re.compile(r"(\d+(\.\d*)?|\.\d+)")


class ParseError(KPVoteError, ValueError):
    """Malformed input file. ``kind`` names the failure, ``line`` is 1-based."""

    def __init__(self, kind, message, line):
        super().__init__(f"{message} at line {line}")
        self.kind = kind
        self.message = message
        self.line = line


@dataclass
class ProfileDocument:
    candidates: list
    entries: list  # (multiplicity, [candidate names])

    def to_profile(self):
        return Profile(self.candidates, [(names, mult) for mult, names in self.entries])


@dataclass
class ElectionDocument:
    candidates: list
    votes: list  # [candidate names] per voter

    def to_election(self):
        return Election(tuple(self.candidates), tuple(self.votes))


def _content_lines(text):
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        yield number, line


def _parse_header(lines):
    try:
        number, line = next(lines)
    except StopIteration:
        raise ParseError("missing-header", "missing 'candidates:' header", 1) from None
    key, sep, rest = line.partition(":")
    if not sep or key.strip() != "candidates":
        raise ParseError("missing-header", "missing 'candidates:' header", number)
    names = []
    for token in rest.split(","):
        token = token.strip()
        if not TOKEN_RE.fullmatch(token):
            raise ParseError("invalid-candidate", f"invalid candidate name {token!r}", number)
        if token in names:
            raise ParseError("duplicate-candidate", f"duplicate candidate {token!r}", number)
        names.append(token)
    return names


def _parse_ballot(text, known, number):
    if not text.strip():
        raise ParseError("empty-ballot", "empty ballot", number)
    members = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            raise ParseError("syntax", "empty candidate token in ballot", number)
        if token not in known:
            raise ParseError("unknown-candidate", f"unknown candidate {token!r}", number)
        if token in members:
            raise ParseError("duplicate-candidate", f"candidate {token!r} repeated in ballot", number)
        members.append(token)
    return members


def parse_multiplicity(token, number=0):
    """Nonnegative decimal: ``int`` when integral, else an exact ``Fraction``."""
    token = token.strip()
    if token.startswith("-") and MULTIPLICITY_RE.fullmatch(token[1:]):
        raise ParseError("negative-multiplicity", f"negative multiplicity {token!r}", number)
    if not MULTIPLICITY_RE.fullmatch(token):
        raise ParseError("invalid-multiplicity", f"invalid multiplicity {token!r}", number)
    value = Fraction(Decimal(token))
    return value.numerator if value.denominator == 1 else value


def parse_profile(text):
    lines = _content_lines(text)
    names = _parse_header(lines)
    known = set(names)
    entries = []
    for number, line in lines:
        mult, sep, ballot = line.partition(":")
        if not sep:
            raise ParseError("syntax", "expected '<multiplicity> : <ballot>'", number)
        entries.append((parse_multiplicity(mult, number), _parse_ballot(ballot, known, number)))
    return ProfileDocument(candidates=names, entries=entries)


def parse_election(text):
    lines = _content_lines(text)
    names = _parse_header(lines)
    known = set(names)
    votes = []
    for number, line in lines:
        key, sep, ballot = line.partition(":")
        if not sep or key.strip() != "vote":
            raise ParseError("syntax", "expected 'vote: <ballot>'", number)
        votes.append(_parse_ballot(ballot, known, number))
    return ElectionDocument(candidates=names, votes=votes)


def format_multiplicity(value):
    """Exact decimal rendering of an ``int``/``Fraction``/float multiplicity."""
    if isinstance(value, float):
        return repr(value)
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    digits = 0
    while (value * 10 ** digits).denominator != 1:
        digits += 1
        if digits > 60:
            return repr(float(value))
    whole = str(int(value * 10 ** digits)).rjust(digits + 1, "0")
    return f"{whole[:-digits]}.{whole[-digits:]}"


def serialize_profile(profile):
    """Canonical profile text: merged entries ordered by ballot size, then members."""
    lines = [f"candidates: {','.join(profile.candidates)}"]
    for ballot, mult in profile.sorted_items():
        lines.append(f"{format_multiplicity(mult)} : {','.join(profile.names(ballot))}")
    return "\n".join(lines) + "\n"


def serialize_election(election):
    lines = [f"candidates: {','.join(election.candidates)}"]
    lines.extend(f"vote: {','.join(names)}" for names in election.named_votes())
    return "\n".join(lines) + "\n"


def load_profile(path):
    with open(path, encoding="utf-8") as fh:
        return parse_profile(fh.read()).to_profile()


def load_election(path):
    with open(path, encoding="utf-8") as fh:
        return parse_election(fh.read()).to_election()


def dump_json(document):
    return json.dumps(document, indent=2) + "\n"


def dump_tsv(rows):
    return "".join("\t".join(str(cell) for cell in row) + "\n" for row in rows)
