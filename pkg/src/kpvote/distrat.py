"""Distance rationalizability of k,p-approval voting with respect to unanimity.

Ballots are compared by a :class:`BallotMetric`; elections by the positional
sum of ballot distances. A committee's DR score is the distance from the
election to the nearest election in which every vote contains the committee.
"""

import functools
import heapq
import itertools
import math
from dataclasses import dataclass, field

from .core import (
    INF,
    DomainError,
    InvariantError,
    Profile,
    REL_TOL,
    ResourceError,
    all_ballots,
    argmin_set,
    candidate_scores,
    check_p,
    is_close,
    is_exact,
    lp_weight,
    winners,
)

MAX_LAYER_CANDIDATES = 16
MAX_DR_CANDIDATES = 12
METRIC_CHECK_CANDIDATES = 4


@dataclass(frozen=True)
class Election:
    """An ordered sequence of nonempty ballots over named candidates."""

    candidates: tuple
    votes: tuple

    def __post_init__(self):
        names = tuple(str(c) for c in self.candidates)
        object.__setattr__(self, "candidates", names)
        profile = Profile(names)
        votes = tuple(profile.ballot(v) for v in self.votes)
        if not votes:
            raise DomainError("an election needs at least one vote")
        object.__setattr__(self, "votes", votes)

    @property
    def n(self):
        return len(self.candidates)

    @property
    def m(self):
        return len(self.votes)

    def to_profile(self):
        return Profile.from_ballots(self.candidates, self.votes)

    def replace(self, position, ballot):
        votes = list(self.votes)
        votes[position] = frozenset(ballot)
        return Election(self.candidates, tuple(votes))

    def named_votes(self):
        return [[self.candidates[i] for i in sorted(v)] for v in self.votes]


# -- ballot metrics -----------------------------------------------------------


def symdiff_distance(b1, b2):
    """Size of the symmetric difference of two ballots."""
    return len(frozenset(b1) ^ frozenset(b2))


def _mask(ballot):
    mask = 0
    for c in ballot:
        mask |= 1 << c
    return mask


def _edge_cost(smaller_size, p):
    """Cost of the lattice edge between a ballot of ``smaller_size`` and its one-element extension."""
    return lp_weight(smaller_size, p)


def _layer_neighbors(mask, n, p):
    size = bin(mask).count("1")
    for c in range(n):
        bit = 1 << c
        if mask & bit:
            if size > 1:
                yield mask ^ bit, _edge_cost(size - 1, p)
        else:
            yield mask | bit, _edge_cost(size, p)


def _check_layer_args(n, p):
    p = check_p(p)
    if n > MAX_LAYER_CANDIDATES:
        raise ResourceError(f"layer graph limited to {MAX_LAYER_CANDIDATES} candidates, got {n}")
    return p


def layer_distance(b1, b2, p, n=None):
    """Cheapest path between two ballots in the layer graph over ``n`` candidates.

    Going up from a ballot of size ``s`` (or down to it) costs ``1 / s^(1/p)``.
    Exact for ``p`` in {1, inf}.
    """
    b1, b2 = frozenset(b1), frozenset(b2)
    if not b1 or not b2:
        raise DomainError("ballots must approve of at least one candidate")
    if n is None:
        n = max(b1 | b2) + 1
    p = _check_layer_args(n, p)
    source, target = _mask(b1), _mask(b2)
    if source >> n or target >> n:
        raise DomainError(f"ballots are not within {n} candidates")
    if source == target:
        return 0
    best = {source: 0}
    heap = [(0, source)]
    done = set()
    while heap:
        dist, node = heapq.heappop(heap)
        if node in done:
            continue
        if node == target:
            return dist
        done.add(node)
        for nxt, cost in _layer_neighbors(node, n, p):
            candidate = dist + cost
            if nxt not in best or candidate < best[nxt]:
                best[nxt] = candidate
                heapq.heappush(heap, (candidate, nxt))
    raise InvariantError("layer graph is connected; target must be reachable")


@functools.lru_cache(maxsize=4096)
def _layer_table(source, p, n):
    """Single-source shortest-path distances from ``source`` (a bitmask)."""
    best = {source: 0}
    heap = [(0, source)]
    done = {}
    while heap:
        dist, node = heapq.heappop(heap)
        if node in done:
            continue
        done[node] = dist
        for nxt, cost in _layer_neighbors(node, n, p):
            candidate = dist + cost
            if nxt not in best or candidate < best[nxt]:
                best[nxt] = candidate
                heapq.heappush(heap, (candidate, nxt))
    return done


class BallotMetric:
    """A distance on ballots.

    Parameters
    ----------
    evaluator : callable
        ``evaluator(b1, b2) -> float`` on frozensets of candidate indices.
    identifier : str
        ``"symdiff"``, ``"layer"`` or ``"custom"``; the first two enable closed
        forms in :func:`nearest_unanimous`.
    p : norm exponent, optional
        Exponent of the layer metric.
    n : int, optional
        Candidate universe, used by the construction check.
    check : bool
        Verify symmetry, identity and the triangle inequality on all ballots
        over ``min(n, 4)`` candidates.
    """

    def __init__(self, evaluator, identifier="custom", p=None, n=None, check=True):
        self.evaluator = evaluator
        self.identifier = identifier
        self.p = p
        self.n = n
        if check and n is not None:
            violation = metric_violation(self, min(n, METRIC_CHECK_CANDIDATES))
            if violation is not None:
                raise DomainError(f"{self.identifier} is not a metric: {violation}")

    def __call__(self, b1, b2):
        return self.evaluator(frozenset(b1), frozenset(b2))

    def __repr__(self):
        if self.p is None:
            return f"BallotMetric({self.identifier})"
        return f"BallotMetric({self.identifier}, p={self.p})"

    @classmethod
    def symdiff(cls, n=None):
        return cls(symdiff_distance, "symdiff", n=n)

    @classmethod
    def layer(cls, p, n):
        p = _check_layer_args(n, p)

        def evaluator(b1, b2):
            return _layer_table(_mask(b1), p, n)[_mask(b2)]

        return cls(evaluator, "layer", p=p, n=n)

    @classmethod
    def custom(cls, evaluator, n=None, check=False):
        return cls(evaluator, "custom", n=n, check=check)


def metric_violation(metric, n):
    """First violated metric axiom over all ballots on ``n`` candidates, or None."""
    ballots = all_ballots(n)
    table = {(a, b): metric(a, b) for a in ballots for b in ballots}
    for a in ballots:
        if not is_close(table[a, a], 0):
            return f"d({sorted(a)}, {sorted(a)}) = {table[a, a]} != 0"
    for a, b in itertools.combinations(ballots, 2):
        if not is_close(table[a, b], table[b, a]):
            return f"d({sorted(a)}, {sorted(b)}) != d({sorted(b)}, {sorted(a)})"
        if table[a, b] <= 0:
            return f"d({sorted(a)}, {sorted(b)}) = {table[a, b]} is not positive"
    for a, b, c in itertools.product(ballots, repeat=3):
        lhs, rhs = table[a, c], table[a, b] + table[b, c]
        if lhs > rhs and not is_close(lhs, rhs):
            return f"triangle inequality fails for {sorted(a)}, {sorted(b)}, {sorted(c)}"
    return None


def election_distance(e1, e2, metric):
    """Positional sum of ballot distances between two equal-length elections."""
    if e1.m != e2.m:
        raise DomainError(f"elections have different lengths {e1.m} and {e2.m}")
    return _sum(metric(v1, v2) for v1, v2 in zip(e1.votes, e2.votes))


def _sum(values):
    values = list(values)
    if all(is_exact(v) for v in values):
        return sum(values)
    return math.fsum(values)


# -- nearest unanimous elections ---------------------------------------------


def _supersets(committee, n):
    rest = [c for c in range(n) if c not in committee]
    for size in range(len(rest) + 1):
        for extra in itertools.combinations(rest, size):
            yield committee | frozenset(extra)


def nearest_ballots(vote, committee, metric, n):
    """All ballots containing ``committee`` at minimum distance from ``vote``, and that distance."""
    dists = {u: metric(vote, u) for u in _supersets(frozenset(committee), n)}
    nearest = argmin_set(dists)
    best = min(dists[u] for u in nearest)
    return sorted(nearest, key=lambda u: (len(u), sorted(u))), best


def nearest_unanimous_bruteforce(election, committee, metric):
    """Per-vote exhaustive minimization over ballots containing ``committee``."""
    K = frozenset(committee)
    _check_dr_size(election.n)
    witness, parts = [], []
    for v in election.votes:
        ballots, best = nearest_ballots(v, K, metric, election.n)
        witness.append(ballots[0])
        parts.append(best)
    return Election(election.candidates, tuple(witness)), _sum(parts)


def nearest_unanimous(election, committee, metric, method="auto"):
    """Nearest election in which every vote contains ``committee``, and its distance.

    ``method="auto"`` uses the closed forms for the symmetric-difference metric
    (``K | v``) and for the layer metric with a single-member committee
    (``v | {c}``); other cases, or ``method="bruteforce"``, minimize each
    vote independently.
    """
    K = frozenset(committee)
    if not K or any(not 0 <= c < election.n for c in K):
        raise DomainError(f"committee {sorted(K)} is not within {election.n} candidates")
    if method == "bruteforce":
        return nearest_unanimous_bruteforce(election, K, metric)
    if method != "auto":
        raise DomainError(f"unknown method {method!r}")
    if metric.identifier == "symdiff":
        witness = Election(election.candidates, tuple(K | v for v in election.votes))
        distance = election_distance(election, witness, metric)
        scores = candidate_scores(election.to_profile(), INF)
        expected = election.m * len(K) - sum(scores[c] for c in K)
        if distance != expected:
            raise InvariantError(f"symdiff closed form mismatch: {distance} != {expected}")
        return witness, distance
    if metric.identifier == "layer" and len(K) == 1:
        (c,) = K
        witness = Election(election.candidates, tuple(v | K for v in election.votes))
        p = metric.p
        # One lattice edge per vote lacking c; equals the total weight minus s_p(c).
        distance = _sum(lp_weight(len(v), p) for v in election.votes if c not in v)
        total = _sum(lp_weight(len(v), p) for v in election.votes)
        scores = candidate_scores(election.to_profile(), p)
        if not is_close(distance, total - scores[c]):
            raise InvariantError(f"layer closed form mismatch: {distance} != {total - scores[c]}")
        return witness, distance
    return nearest_unanimous_bruteforce(election, K, metric)


def _check_dr_size(n):
    if n > MAX_DR_CANDIDATES:
        raise ResourceError(f"ballot enumeration limited to {MAX_DR_CANDIDATES} candidates, got {n}")


@dataclass
class DrResult:
    """DR scores of every committee, the minimizing committees, and nearest unanimous witnesses."""

    scores: dict
    winners: frozenset
    nearest: dict = field(default_factory=dict)


def dr_winners(election, k, metric, method="auto"):
    """Committees whose nearest unanimous election is closest to ``election``."""
    if not 1 <= k <= election.n:
        raise DomainError(f"committee size {k} must lie in [1, {election.n}]")
    _check_dr_size(election.n)
    scores, witnesses = {}, {}
    for members in itertools.combinations(range(election.n), k):
        K = frozenset(members)
        witnesses[K], scores[K] = nearest_unanimous(election, K, metric, method)
    best = argmin_set(scores)
    return DrResult(scores=scores, winners=best, nearest={K: witnesses[K] for K in best})


# -- the k > 1, p < inf impossibility ----------------------------------------


def counterexample_candidates(k, n):
    return (
        ["a1", "a2", "a3"]
        + [f"b{i}" for i in range(1, k - 1)]
        + [f"c{i}" for i in range(1, n - k)]
    )


def _counterexample_scores(k, p, m1, m2, m3):
    """Scores of a1, a2, a3 in the counterexample election."""
    big, small = float(lp_weight(k, p)), float(lp_weight(k - 1, p))
    return m1 * big + m2 * small, m3 * small, m1 * big


def _separated(a, b):
    """``a > b`` with a margin of at least 1000 times the tie tolerance."""
    return a - b > 1e3 * REL_TOL * max(abs(a), abs(b), 1.0)


def construct_counterexample(k, p, n=None):
    """Election on which no vote-distance rationalization of F_{k,p} can agree.

    Votes are ``m1 x {a1, a3, b...}``, ``m2 x {a1, b...}`` and
    ``m3 x {a2, b...}`` where ``m3 < m1 < m3 (k/(k-1))^(1/p)`` is the smallest
    feasible pair and ``m2`` the smallest count making ``a1`` the top ``a``
    candidate. Returns the election and its F_{k,p} outcome
    ``{{a1, a2, b...}}``.
    """
    p = check_p(p)
    if k < 2:
        raise DomainError(f"counterexample needs k >= 2, got {k}")
    if p == INF:
        raise DomainError("counterexample needs a finite norm exponent")
    n = k + 1 if n is None else n
    if n < k + 1:
        raise DomainError(f"counterexample needs at least k + 1 = {k + 1} candidates, got {n}")
    names = counterexample_candidates(k, n)
    idx = {name: i for i, name in enumerate(names)}
    bs = frozenset(idx[f"b{i}"] for i in range(1, k - 1))

    m1 = m3 = None
    m3_try = 1
    while m1 is None:
        m1_try = m3_try + 1
        while m1_try < m3_try * (k / (k - 1)) ** (1 / p):
            _, a2, a3 = _counterexample_scores(k, p, m1_try, 0, m3_try)
            if _separated(a2, a3):
                m1, m3 = m1_try, m3_try
                break
            m1_try += 1
        m3_try += 1
    m2 = 1
    while not _separated(_counterexample_scores(k, p, m1, m2, m3)[0],
                         _counterexample_scores(k, p, m1, m2, m3)[1]):
        m2 += 1

    votes = (
        [frozenset([idx["a1"], idx["a3"]]) | bs] * m1
        + [frozenset([idx["a1"]]) | bs] * m2
        + [frozenset([idx["a2"]]) | bs] * m3
    )
    election = Election(tuple(names), tuple(votes))
    expected = frozenset([frozenset([idx["a1"], idx["a2"]]) | bs])
    got = winners(election.to_profile(), k, p)
    if got != expected:
        raise InvariantError(f"counterexample outcome {got} differs from {expected}")
    return election, expected


def counterexample_counts(election):
    """``(m1, m2, m3)`` of an election built by :func:`construct_counterexample`."""
    idx = {name: i for i, name in enumerate(election.candidates)}
    a1, a2, a3 = idx["a1"], idx["a2"], idx["a3"]
    m1 = sum(1 for v in election.votes if a3 in v)
    m2 = sum(1 for v in election.votes if a1 in v and a3 not in v)
    m3 = sum(1 for v in election.votes if a2 in v)
    return m1, m2, m3


@dataclass
class Falsification:
    election: Election
    dr_winners: frozenset
    rule_winners: frozenset


def falsify_metric(metric, k, p, elections, method="auto"):
    """First election whose DR winners under ``metric`` differ from F_{k,p}, or None."""
    for election in elections:
        dr = dr_winners(election, k, metric, method).winners
        rule = winners(election.to_profile(), k, p)
        if dr != rule:
            return Falsification(election=election, dr_winners=dr, rule_winners=rule)
    return None


# -- the single-vote replacement lemma ----------------------------------------


@dataclass
class LemmaVerdict:
    holds: bool
    checked: int
    counterexample: dict = None


def _nearest_unanimous_all(election, k, metric):
    """Minimum distance to the unanimous class and every (committee, election) achieving it."""
    per_committee = {}
    for members in itertools.combinations(range(election.n), k):
        K = frozenset(members)
        options, total = [], []
        for v in election.votes:
            ballots, best = nearest_ballots(v, K, metric, election.n)
            options.append(ballots)
            total.append(best)
        per_committee[K] = (options, _sum(total))
    best_committees = argmin_set({K: d for K, (_, d) in per_committee.items()})
    best = min(per_committee[K][1] for K in best_committees)
    nearest = []
    for K in sorted(best_committees, key=sorted):
        for votes in itertools.product(*per_committee[K][0]):
            nearest.append((K, Election(election.candidates, votes)))
    return best, nearest


def _min_to_class(election, k, metric, scope_committee=None):
    if scope_committee is not None:
        return _sum(nearest_ballots(v, scope_committee, metric, election.n)[1]
                    for v in election.votes)
    return min(
        _sum(nearest_ballots(v, frozenset(K), metric, election.n)[1] for v in election.votes)
        for K in itertools.combinations(range(election.n), k)
    )


def check_replacement_lemma(metric, election, k, scope="global"):
    """Check that a nearest unanimous election stays nearest after copying one of its votes.

    For every nearest unanimous election ``U`` and every position ``l``, the
    election with vote ``l`` replaced by ``U``'s vote must still have ``U`` among
    its nearest unanimous elections. ``scope="global"`` ranges over the whole
    unanimous class (all committees); ``scope="committee"`` restricts both the
    nearest elections and the comparison to each committee's own class.
    """
    _check_dr_size(election.n)
    if scope == "global":
        _, nearest = _nearest_unanimous_all(election, k, metric)
    elif scope == "committee":
        nearest = []
        for members in itertools.combinations(range(election.n), k):
            K = frozenset(members)
            options = [nearest_ballots(v, K, metric, election.n)[0] for v in election.votes]
            nearest.extend((K, Election(election.candidates, votes))
                           for votes in itertools.product(*options))
    else:
        raise DomainError(f"unknown scope {scope!r}")
    checked = 0
    for K, unanimous in nearest:
        for position in range(election.m):
            checked += 1
            replaced = election.replace(position, unanimous.votes[position])
            distance = election_distance(replaced, unanimous, metric)
            floor = _min_to_class(replaced, k, metric, K if scope == "committee" else None)
            if distance > floor and not is_close(distance, floor):
                return LemmaVerdict(False, checked, {
                    "committee": K, "unanimous": unanimous, "position": position,
                    "replaced": replaced, "distance": distance, "nearest_distance": floor,
                })
    return LemmaVerdict(True, checked)

