from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import FIXTURES, PARSE_ERROR_FIXTURES, norm_sensitive_profile, profiles
from kpvote.core import Profile
from kpvote.distrat import Election
from kpvote.formats import (
    ParseError,
    dump_json,
    dump_tsv,
    format_multiplicity,
    load_election,
    load_profile,
    parse_election,
    parse_multiplicity,
    parse_profile,
    serialize_election,
    serialize_profile,
)


def test_load_norm_sensitive_profile():
    assert load_profile(FIXTURES / "norm_sensitive.profile") == norm_sensitive_profile()


def test_load_election():
    election = load_election(FIXTURES / "small.election")
    assert election.candidates == ("c1", "c2", "c3")
    assert election.votes == (frozenset({0}), frozenset({1, 2}))


def test_duplicate_lines_merge():
    profile = parse_profile("candidates: a,b\n1 : a\n2 : a\n").to_profile()
    assert profile[["a"]] == 3


def test_whitespace_and_comments():
    text = "  # header comment\ncandidates:  a , b \n\n 1.5 :  b , a  \n"
    document = parse_profile(text)
    assert document.candidates == ["a", "b"]
    assert document.entries == [(Fraction(3, 2), ["b", "a"])]


def test_zero_multiplicity_accepted():
    assert parse_profile("candidates: a\n0 : a\n").to_profile().total() == 0


@pytest.mark.parametrize("token,value", [
    ("3", 3), ("0", 0), ("1.5", Fraction(3, 2)), ("2.0", 2), (".25", Fraction(1, 4)), ("7.", 7),
])
def test_parse_multiplicity(token, value):
    parsed = parse_multiplicity(token)
    assert parsed == value
    assert type(parsed) is type(value)


@pytest.mark.parametrize("token", ["1e3", "abc", "", "1/2", "nan", "inf"])
def test_parse_multiplicity_rejects(token):
    with pytest.raises(ParseError) as info:
        parse_multiplicity(token, 4)
    assert info.value.kind == "invalid-multiplicity"
    assert info.value.line == 4


@pytest.mark.parametrize("name", sorted(PARSE_ERROR_FIXTURES))
def test_error_fixtures(name):
    kind, line = PARSE_ERROR_FIXTURES[name]
    loader = load_profile if name.endswith(".profile") else load_election
    with pytest.raises(ParseError) as info:
        loader(FIXTURES / "errors" / name)
    assert info.value.kind == kind
    assert info.value.line == line
    assert str(info.value).endswith(f"at line {line}")


def test_unknown_candidate_message():
    with pytest.raises(ParseError, match=r"^unknown candidate 'b' at line 2$"):
        parse_profile("candidates: c1,c2\n2 : b\n")


def test_empty_file():
    with pytest.raises(ParseError) as info:
        parse_profile("")
    assert info.value.kind == "missing-header"


def test_repeated_candidate_in_ballot():
    with pytest.raises(ParseError) as info:
        parse_election("candidates: a,b\nvote: a,a\n")
    assert info.value.kind == "duplicate-candidate"


@pytest.mark.parametrize("value,text", [
    (3, "3"), (Fraction(3, 2), "1.5"), (Fraction(1, 8), "0.125"), (Fraction(7, 20), "0.35"),
])
def test_format_multiplicity(value, text):
    assert format_multiplicity(value) == text
    assert parse_multiplicity(text) == value


def test_format_repeating_fraction():
    # No finite decimal exists; fall back to the float repr.
    assert format_multiplicity(Fraction(1, 3)) == repr(1 / 3)


def test_serialize_canonical():
    profile = Profile(["a", "b"], {("a", "b"): 1, ("b",): 2, ("a",): Fraction(1, 2)})
    assert serialize_profile(profile) == "candidates: a,b\n0.5 : a\n2 : b\n1 : a,b\n"


@given(profiles())
def test_profile_round_trip(profile):
    text = serialize_profile(profile)
    again = parse_profile(text).to_profile()
    assert again == profile
    assert serialize_profile(again) == text


def test_election_round_trip():
    election = Election(("a", "b", "c"), (["c", "a"], ["b"], ["c"]))
    text = serialize_election(election)
    assert text == "candidates: a,b,c\nvote: a,c\nvote: b\nvote: c\n"
    assert parse_election(text).to_election() == election


@given(st.dictionaries(st.sampled_from("abc"), st.integers(0, 5)))
def test_dump_json_deterministic(document):
    assert dump_json(document) == dump_json(dict(document))
    assert dump_json(document).endswith("\n")


def test_dump_tsv():
    assert dump_tsv([("a", 1), ("b", 2.5)]) == "a\t1\nb\t2.5\n"
