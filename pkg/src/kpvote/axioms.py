"""Profile algebra for real-weighted profiles and an axiom audit harness.

The audit harness takes an arbitrary voting rule ``rule(profile, k, p) ->
outcome`` and searches for a violation of one axiom. Exhaustive checks are
used where the axiom quantifies over ballots; randomized, seeded trials are
used where it quantifies over profiles.
"""

import enum
import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction

from .core import (
    INF,
    DomainError,
    Profile,
    ResourceError,
    all_ballots,
    all_committees,
    ballot_norm,
    candidate_scores,
    check_p,
    is_close,
    winners,
    winners_function,
)

MAX_AUDIT_CANDIDATES = 10

SCALING_FACTORS = (Fraction(1, 3), 0.7, math.sqrt(2), math.pi, 10)


class AxiomId(str, enum.Enum):
    K_FAITHFULNESS = "k-faithfulness"
    CONSISTENCY = "consistency"
    P_CANCELLATION = "p-cancellation"
    P_DISJOINT_EQUALITY = "p-disjoint-equality"
    POSITIVE_SCALING = "positive-scaling"

    @classmethod
    def parse(cls, name):
        try:
            return cls(name)
        except ValueError:
            valid = ", ".join(a.value for a in cls)
            raise DomainError(f"unknown axiom {name!r}; expected one of {valid}") from None


PASS = "pass-within-budget"
COUNTEREXAMPLE = "counterexample"


@dataclass
class AuditReport:
    """Result of auditing one axiom for one rule.

    ``witness`` holds the violating input and the offending outcomes, with keys
    depending on the axiom (``profile``, ``other``, ``ballot``, ``ballots``,
    ``scale``, ``expected``, ``got``).
    """

    axiom: AxiomId
    verdict: str
    trials: int
    witness: dict = field(default=None)

    @property
    def passed(self):
        return self.verdict == PASS


def single_ballot_profile(ballot, candidates):
    """Profile with one voter casting ``ballot``."""
    profile = Profile(candidates)
    return Profile(profile.candidates, {profile.ballot(ballot): 1})


def unit_score_profile(ballot, p, candidates):
    """``|b|^(1/p)`` voters casting ``ballot``, so that each member scores exactly 1."""
    profile = Profile(candidates)
    b = profile.ballot(ballot)
    return Profile(profile.candidates, {b: ballot_norm(len(b), p)})


def combine(terms, candidates=None):
    """Nonnegative linear combination ``sum(coef * profile)`` of profiles."""
    terms = list(terms)
    if candidates is None:
        if not terms:
            raise DomainError("cannot combine an empty list without a candidate set")
        candidates = terms[0][1].candidates
    result = Profile(candidates)
    for coef, profile in terms:
        if isinstance(coef, bool) or coef < 0:
            raise DomainError(f"combination coefficients must be nonnegative, got {coef!r}")
        result = result + profile.scale(coef)
    return result


def canonical_singleton_profile(profile, p):
    """Singleton-only profile giving each candidate the same ``s_p`` score as ``profile``."""
    scores = candidate_scores(profile, p)
    return Profile(profile.candidates, {frozenset([c]): s for c, s in enumerate(scores) if s})


def tier_decomposition(profile, p):
    """Decompose the score vector into nested unit-score tier ballots.

    Returns ``[(t_i - t_{i+1}, ballot_i), ...]`` where ``t_1 > t_2 > ... > 0``
    are the distinct positive scores and ``ballot_i`` holds every candidate
    scoring at least ``t_i``. Recombining ``coef * unit_score_profile`` terms
    reproduces every candidate score.
    """
    scores = candidate_scores(profile, p)
    levels = _distinct_levels(scores)
    terms = []
    for i, t in enumerate(levels):
        following = levels[i + 1] if i + 1 < len(levels) else 0
        members = frozenset(c for c, s in enumerate(scores) if s >= t or is_close(s, t))
        terms.append((t - following, members))
    return terms


def _distinct_levels(scores):
    levels = []
    for s in sorted(scores, key=float, reverse=True):
        if is_close(s, 0):
            break
        if not levels or not is_close(levels[-1], s):
            levels.append(s)
    return levels


def recombine_tiers(terms, p, candidates):
    """Profile ``sum(coef * unit_score_profile(ballot))`` of a tier decomposition."""
    return combine(((coef, unit_score_profile(b, p, candidates)) for coef, b in terms), candidates)


# -- rules -----------------------------------------------------------------


def kp_rule(rule_p=None):
    """F_{k,p} as an audit rule; ``rule_p`` pins the exponent regardless of the audited p."""

    def rule(profile, k, p):
        return winners(profile, k, p if rule_p is None else rule_p)

    rule.__name__ = "builtin" if rule_p is None else f"builtin[p={rule_p}]"
    return rule


def _all_committees_rule(profile, k, p):
    return all_committees(profile.n, k)


def _wrong_norm_rule(profile, k, p):
    return winners(profile, k, 1 if check_p(p) == INF else INF)


def _squared_multiplicity_rule(profile, k, p):
    squared = Profile(profile.candidates, {b: m * m for b, m in profile.items()})
    return winners(squared, k, p)


def _mass_threshold_rule(profile, k, p):
    if profile.total() < 1:
        return all_committees(profile.n, k)
    return winners(profile, k, p)


# Deliberately broken rules, each paired with the axiom it is built to violate.
BROKEN_RULES = {
    "all-committees": (_all_committees_rule, AxiomId.K_FAITHFULNESS),
    "squared-multiplicity": (_squared_multiplicity_rule, AxiomId.CONSISTENCY),
    "wrong-norm": (_wrong_norm_rule, AxiomId.P_CANCELLATION),
    "wrong-norm-disjoint": (_wrong_norm_rule, AxiomId.P_DISJOINT_EQUALITY),
    "mass-threshold": (_mass_threshold_rule, AxiomId.POSITIVE_SCALING),
}


def get_rule(name, rule_p=None):
    if name == "builtin":
        return kp_rule(rule_p)
    try:
        return BROKEN_RULES[name][0]
    except KeyError:
        valid = ", ".join(["builtin", *BROKEN_RULES])
        raise DomainError(f"unknown rule {name!r}; expected one of {valid}") from None


# -- random profiles ---------------------------------------------------------


def random_profile(rng, candidates, max_multiplicity=10, real=False):
    """Each ballot present with probability 1/2, multiplicity uniform on
    ``{0..max_multiplicity}`` (or on ``[0, max_multiplicity]`` when ``real``)."""
    base = Profile(candidates)
    counts = {}
    for b in all_ballots(base.n):
        if rng.random() < 0.5:
            if real:
                counts[b] = rng.uniform(0, max_multiplicity)
            else:
                counts[b] = rng.randint(0, max_multiplicity)
    profile = Profile(base.candidates, counts)
    if not profile.total() > 0:
        profile = Profile(base.candidates, {frozenset([rng.randrange(base.n)]): 1})
    return profile


def equalize_scores(profile, p):
    """Add singleton unit-score terms so every candidate reaches the maximum score."""
    scores = candidate_scores(profile, p)
    top = max(scores)
    extra = Profile(profile.candidates, {
        frozenset([c]): top - s for c, s in enumerate(scores) if top - s > 0
    })
    return profile + extra


def _trial_rng(seed, axiom, trial):
    return random.Random(f"{seed}/{axiom.value}/{trial}")


# -- audit -------------------------------------------------------------------


def audit(rule, axiom, k, p, n, trials=1000, seed=0, max_multiplicity=10):
    """Search for a violation of ``axiom`` by ``rule`` over ``n`` candidates.

    Returns an :class:`AuditReport`; exhausting the budget without finding a
    violation is the ``pass-within-budget`` verdict.
    """
    axiom = AxiomId.parse(axiom) if isinstance(axiom, str) else axiom
    p = check_p(p)
    if n > MAX_AUDIT_CANDIDATES:
        raise ResourceError(f"audit limited to {MAX_AUDIT_CANDIDATES} candidates, got {n}")
    if not 1 <= k <= n:
        raise DomainError(f"committee size {k} must lie in [1, {n}]")
    candidates = Profile(n).candidates
    checker = _CHECKERS[axiom]
    return checker(rule, k, p, candidates, trials, seed, max_multiplicity)


def _report(axiom, trials, witness=None):
    verdict = PASS if witness is None else COUNTEREXAMPLE
    return AuditReport(axiom=axiom, verdict=verdict, trials=trials, witness=witness)


def _audit_faithfulness(rule, k, p, candidates, trials, seed, max_multiplicity):
    n = len(candidates)
    count = 0
    for b in all_ballots(n):
        count += 1
        profile = single_ballot_profile(b, candidates)
        expected = winners_function(b, k, n)
        got = rule(profile, k, p)
        if got != expected:
            return _report(AxiomId.K_FAITHFULNESS, count, {
                "ballot": b, "profile": profile, "expected": expected, "got": got,
            })
    return _report(AxiomId.K_FAITHFULNESS, count)


def _audit_disjoint_equality(rule, k, p, candidates, trials, seed, max_multiplicity):
    n = len(candidates)
    count = 0
    for b, b2 in pairwise_disjoint_ballots(n):
        count += 1
        profile = unit_score_profile(b, p, candidates) + unit_score_profile(b2, p, candidates)
        expected = winners_function(b | b2, k, n)
        got = rule(profile, k, p)
        if got != expected:
            return _report(AxiomId.P_DISJOINT_EQUALITY, count, {
                "ballots": (b, b2), "profile": profile, "expected": expected, "got": got,
            })
    return _report(AxiomId.P_DISJOINT_EQUALITY, count)


def _cancellation_instances(k, p, candidates, trials, seed, max_multiplicity):
    n = len(candidates)
    full = frozenset(range(n))
    yield unit_score_profile(full, p, candidates)
    for b in all_ballots(n):
        if b == full:
            continue
        yield unit_score_profile(b, p, candidates) + unit_score_profile(full - b, p, candidates)
    for trial in range(trials):
        rng = _trial_rng(seed, AxiomId.P_CANCELLATION, trial)
        base = random_profile(rng, candidates, max_multiplicity, real=trial % 2 == 1)
        yield equalize_scores(base, p)


def _audit_cancellation(rule, k, p, candidates, trials, seed, max_multiplicity):
    n = len(candidates)
    expected = all_committees(n, k)
    count = 0
    for profile in _cancellation_instances(k, p, candidates, trials, seed, max_multiplicity):
        count += 1
        got = rule(profile, k, p)
        if got != expected:
            return _report(AxiomId.P_CANCELLATION, count, {
                "profile": profile, "expected": expected, "got": got,
            })
    return _report(AxiomId.P_CANCELLATION, count)


def _boost_committee(profile, committee, amount):
    """Add ``amount`` unit-score singleton terms for each member of ``committee``."""
    boost = Profile(profile.candidates, {frozenset([c]): amount for c in committee})
    return profile + boost


def _consistency_pair(rng, k, p, candidates, rule, max_multiplicity, real):
    first = random_profile(rng, candidates, max_multiplicity, real)
    second = random_profile(rng, candidates, max_multiplicity, real)
    mode = rng.randrange(3)
    if mode == 0:
        return first, second
    # Make a committee of rule(first) strong in second so the premise usually holds.
    target = sorted(rule(first, k, p), key=lambda K: sorted(K))
    if not target:
        return first, second
    committee = target[rng.randrange(len(target))]
    top = max(candidate_scores(second, p))
    if mode == 1:
        amount = top + rng.randint(1, max_multiplicity)
    else:
        # Equalize the committee with the leaders, creating ties in second.
        second = equalize_scores(second, p)
        amount = 0
    if amount:
        second = _boost_committee(second, committee, amount)
    return first, second


def _audit_consistency(rule, k, p, candidates, trials, seed, max_multiplicity):
    for trial in range(trials):
        rng = _trial_rng(seed, AxiomId.CONSISTENCY, trial)
        first, second = _consistency_pair(
            rng, k, p, candidates, rule, max_multiplicity, real=trial % 4 == 3
        )
        out_first = rule(first, k, p)
        out_second = rule(second, k, p)
        common = out_first & out_second
        if not common:
            continue
        got = rule(first + second, k, p)
        if got != common:
            return _report(AxiomId.CONSISTENCY, trial + 1, {
                "profile": first, "other": second, "expected": common, "got": got,
            })
    return _report(AxiomId.CONSISTENCY, trials)


def _audit_scaling(rule, k, p, candidates, trials, seed, max_multiplicity):
    for trial in range(trials):
        rng = _trial_rng(seed, AxiomId.POSITIVE_SCALING, trial)
        profile = random_profile(rng, candidates, max_multiplicity, real=trial % 2 == 1)
        if trial < 2 * len(SCALING_FACTORS):
            factor = SCALING_FACTORS[trial % len(SCALING_FACTORS)]
        else:
            factor = math.exp(rng.uniform(math.log(1e-3), math.log(1e3)))
        expected = rule(profile, k, p)
        got = rule(profile.scale(factor), k, p)
        if got != expected:
            return _report(AxiomId.POSITIVE_SCALING, trial + 1, {
                "profile": profile, "scale": factor, "expected": expected, "got": got,
            })
    return _report(AxiomId.POSITIVE_SCALING, trials)


_CHECKERS = {
    AxiomId.K_FAITHFULNESS: _audit_faithfulness,
    AxiomId.CONSISTENCY: _audit_consistency,
    AxiomId.P_CANCELLATION: _audit_cancellation,
    AxiomId.P_DISJOINT_EQUALITY: _audit_disjoint_equality,
    AxiomId.POSITIVE_SCALING: _audit_scaling,
}


def pairwise_disjoint_ballots(n):
    """Unordered pairs of disjoint nonempty ballots over ``n`` candidates."""
    ballots = all_ballots(n)
    return [(b, c) for b, c in itertools.combinations(ballots, 2) if not b & c]
