import random
from pathlib import Path

import pytest
from hypothesis import strategies as st

from kpvote.core import INF, Profile, all_ballots

FIXTURES = Path(__file__).parent / "fixtures"

P_VALUES = (1, 1.5, 2, 3, INF)

# Malformed input files and the (kind, line) each must be reported with.
PARSE_ERROR_FIXTURES = {
    "missing_header.profile": ("missing-header", 1),
    "unknown_candidate.profile": ("unknown-candidate", 2),
    "negative_multiplicity.profile": ("negative-multiplicity", 3),
    "empty_ballot.profile": ("empty-ballot", 3),
    "invalid_multiplicity.profile": ("invalid-multiplicity", 2),
    "duplicate_candidate.profile": ("duplicate-candidate", 1),
    "syntax.profile": ("syntax", 3),
    "invalid_candidate.profile": ("invalid-candidate", 1),
    "bad_vote.election": ("syntax", 3),
    "unknown_candidate.election": ("unknown-candidate", 2),
}


def norm_sensitive_profile():
    return Profile(3, {
        ("c1",): 800, ("c2",): 600, ("c3",): 122,
        ("c1", "c2"): 100, ("c1", "c3"): 622, ("c2", "c3"): 966,
    })


def overlap_profile():
    return Profile(3, {("c1",): 2, ("c1", "c2"): 2, ("c2", "c3"): 3})


def tied_profile():
    return Profile(3, {("c1",): 2, ("c2", "c3"): 3})


def seeded_profile(rng, n, max_multiplicity=10, real=False):
    counts = {}
    for b in all_ballots(n):
        if rng.random() < 0.5:
            counts[b] = rng.uniform(0, max_multiplicity) if real else rng.randint(0, max_multiplicity)
    profile = Profile(n, counts)
    if not profile.total() > 0:
        profile = Profile(n, {frozenset([rng.randrange(n)]): 1})
    return profile


@st.composite
def profiles(draw, min_n=1, max_n=6, real=False):
    n = draw(st.integers(min_n, max_n))
    ballots = all_ballots(n)
    mult = (st.floats(0, 10, allow_nan=False, allow_infinity=False) if real
            else st.integers(0, 10))
    chosen = draw(st.lists(st.sampled_from(ballots), min_size=1, max_size=12))
    counts = [(b, draw(mult)) for b in chosen]
    anchor = draw(st.sampled_from(ballots))
    counts.append((anchor, draw(st.integers(1, 10))))
    return Profile(n, counts)


norm_exponents = st.sampled_from(P_VALUES)


@pytest.fixture
def rng():
    return random.Random(20240611)


@pytest.fixture
def fixtures_dir():
    return FIXTURES
