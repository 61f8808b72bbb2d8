"""Approval profiles, L^p-normalized scores and k,p-approval committee winners.

A ballot is a nonempty ``frozenset`` of candidate indices. A committee is a
``frozenset`` of exactly ``k`` indices, and an outcome is a ``frozenset`` of
committees (all tied winners; ties are never broken).

Scores are exact (``int``/``Fraction``) when ``p`` is 1 or infinity and every
multiplicity is an integer or a ``Fraction``. Otherwise they are floats and
ties are detected with the tolerance in :func:`is_close`.
"""

import itertools
import math
from fractions import Fraction
from numbers import Integral
from types import MappingProxyType

INF = math.inf

REL_TOL = 1e-9
ABS_TOL = 1e-12

MAX_BRUTEFORCE_CANDIDATES = 20


class KPVoteError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(KPVoteError, ValueError):
    """An argument lies outside the domain of the operation."""


class ResourceError(KPVoteError):
    """An enumeration guard was exceeded."""


class InvariantError(KPVoteError, AssertionError):
    """An internal consistency check failed."""


def check_p(p):
    """Validate a norm exponent and return it as ``int``, ``float`` or ``INF``."""
    if isinstance(p, bool):
        raise DomainError(f"invalid norm exponent {p!r}")
    if isinstance(p, Fraction):
        p = float(p)
    if not isinstance(p, (Integral, float)):
        raise DomainError(f"invalid norm exponent {p!r}")
    if math.isnan(p) or p < 1:
        raise DomainError(f"norm exponent must be >= 1 or inf, got {p!r}")
    if p != INF and float(p).is_integer():
        return int(p)
    return p


def parse_p(text):
    """Parse a norm exponent token: a decimal >= 1, or ``inf`` (any case)."""
    token = str(text).strip()
    if token.lower() == "inf":
        return INF
    try:
        value = float(token)
    except ValueError:
        raise DomainError(f"invalid norm exponent {text!r}") from None
    if math.isinf(value):
        raise DomainError(f"invalid norm exponent {text!r}; spell infinity as 'inf'")
    return check_p(value)


def format_p(p):
    return "inf" if p == INF else format_number(p)


def format_number(x):
    """Render a real with 12 significant digits, dropping a trailing ``.0``."""
    value = float(format(float(x), ".12g"))
    if value.is_integer() and abs(value) < 1e15:
        return str(int(value))
    return repr(value)


def number_value(x):
    """JSON-ready value of ``x`` rounded to 12 significant digits."""
    value = float(format(float(x), ".12g"))
    if value.is_integer() and abs(value) < 1e15:
        return int(value)
    return value


def exact_value(x):
    """Return ``x`` as an ``int``/``Fraction`` if it is exactly representable, else None."""
    if isinstance(x, bool):
        return int(x)
    if isinstance(x, Integral):
        return int(x)
    if isinstance(x, Fraction):
        return x.numerator if x.denominator == 1 else x
    if isinstance(x, float) and x.is_integer():
        return int(x)
    return None


def is_exact(x):
    return isinstance(x, (Integral, Fraction)) and not isinstance(x, bool)


def is_close(a, b):
    """Tie test shared by every argmax/argmin in the package."""
    if is_exact(a) and is_exact(b):
        return a == b
    a, b = float(a), float(b)
    if a == b:
        return True
    return abs(a - b) <= max(REL_TOL * max(abs(a), abs(b)), ABS_TOL)


def lp_weight(ballot_size, p):
    """Weight ``1 / ballot_size ** (1/p)`` of a ballot of the given size.

    Exact for ``p`` in {1, inf}: returns ``1`` or ``Fraction(1, ballot_size)``.
    """
    if ballot_size < 1:
        raise DomainError(f"ballot size must be positive, got {ballot_size}")
    p = check_p(p)
    if p == INF or ballot_size == 1:
        return 1
    if p == 1:
        return Fraction(1, ballot_size)
    return ballot_size ** (-1.0 / p)


def ballot_norm(ballot_size, p):
    """``ballot_size ** (1/p)``, the L^p norm of a 0/1 ballot vector."""
    if ballot_size < 1:
        raise DomainError(f"ballot size must be positive, got {ballot_size}")
    p = check_p(p)
    if p == INF or ballot_size == 1:
        return 1
    if p == 1:
        return ballot_size
    return ballot_size ** (1.0 / p)


def _default_names(n):
    return tuple(f"c{i + 1}" for i in range(n))


class Profile:
    """An anonymous profile: nonnegative multiplicities on approval ballots.

    Parameters
    ----------
    candidates : int or sequence of str
        Number of candidates (names default to ``c1..cn``) or candidate names.
    counts : mapping or iterable of (ballot, multiplicity), optional
        Ballots are iterables of candidate indices or names. Repeated ballots
        accumulate. Zero multiplicities are dropped.
    """

    __slots__ = ("_candidates", "_index", "_counts")

    def __init__(self, candidates, counts=None):
        if isinstance(candidates, Integral):
            if candidates < 1:
                raise DomainError("a profile needs at least one candidate")
            names = _default_names(int(candidates))
        else:
            names = tuple(str(c) for c in candidates)
            if not names:
                raise DomainError("a profile needs at least one candidate")
        if len(set(names)) != len(names):
            raise DomainError(f"duplicate candidate names in {names}")
        self._candidates = names
        self._index = {name: i for i, name in enumerate(names)}
        acc = {}
        if counts is not None:
            items = counts.items() if hasattr(counts, "items") else counts
            for ballot, mult in items:
                b = self.ballot(ballot)
                mult = _check_multiplicity(mult)
                if mult == 0:
                    continue
                acc[b] = acc[b] + mult if b in acc else mult
        self._counts = MappingProxyType(acc)

    @classmethod
    def from_ballots(cls, candidates, ballots):
        """Profile induced by a list of ballots, one voter each."""
        return cls(candidates, [(b, 1) for b in ballots])

    @property
    def candidates(self):
        return self._candidates

    @property
    def n(self):
        return len(self._candidates)

    @property
    def counts(self):
        return self._counts

    def index(self, candidate):
        """Index of a candidate given by index or name."""
        if isinstance(candidate, Integral) and not isinstance(candidate, bool):
            if 0 <= candidate < self.n:
                return int(candidate)
            raise DomainError(f"unknown candidate index {candidate}")
        try:
            return self._index[candidate]
        except (KeyError, TypeError):
            raise DomainError(f"unknown candidate {candidate!r}") from None

    def ballot(self, members):
        """Validate and normalize a ballot (iterable of indices or names)."""
        if isinstance(members, str):
            members = [members]
        b = frozenset(self.index(c) for c in members)
        if not b:
            raise DomainError("ballots must approve of at least one candidate")
        return b

    def committee(self, members, k=None):
        K = frozenset(self.index(c) for c in members)
        if k is not None and len(K) != k:
            raise DomainError(f"committee {sorted(K)} does not have size {k}")
        return K

    def names(self, members):
        """Candidate names of an index set, in index order."""
        return [self._candidates[i] for i in sorted(members)]

    def total(self):
        return sum(self._counts.values())

    def items(self):
        return self._counts.items()

    def __getitem__(self, ballot):
        return self._counts.get(self.ballot(ballot), 0)

    def __len__(self):
        return len(self._counts)

    def __iter__(self):
        return iter(self._counts)

    def _check_compatible(self, other):
        if not isinstance(other, Profile):
            return NotImplemented
        if other._candidates != self._candidates:
            raise DomainError("profiles are over different candidate sets")
        return None

    def __add__(self, other):
        if self._check_compatible(other) is NotImplemented:
            return NotImplemented
        merged = dict(self._counts)
        for b, mult in other._counts.items():
            merged[b] = merged[b] + mult if b in merged else mult
        return Profile(self._candidates, merged)

    def scale(self, factor):
        factor = _check_multiplicity(factor)
        return Profile(self._candidates, {b: factor * m for b, m in self._counts.items()})

    def __rmul__(self, factor):
        return self.scale(factor)

    __mul__ = __rmul__

    def __eq__(self, other):
        if not isinstance(other, Profile):
            return NotImplemented
        return self._candidates == other._candidates and dict(self._counts) == dict(other._counts)

    def __hash__(self):
        return hash((self._candidates, frozenset(self._counts.items())))

    def is_close_to(self, other):
        """Equality up to the tie tolerance on every multiplicity."""
        if self._candidates != other._candidates:
            return False
        keys = set(self._counts) | set(other._counts)
        return all(is_close(self._counts.get(b, 0), other._counts.get(b, 0)) for b in keys)

    def __repr__(self):
        body = ", ".join(
            f"{{{','.join(self.names(b))}}}: {m}" for b, m in self.sorted_items()
        )
        return f"Profile([{', '.join(self._candidates)}], {{{body}}})"

    def sorted_items(self):
        """Entries ordered by ballot size, then by sorted member indices."""
        return sorted(self._counts.items(), key=lambda item: (len(item[0]), sorted(item[0])))


def _check_multiplicity(mult):
    if isinstance(mult, bool) or not isinstance(mult, (Integral, Fraction, float)):
        raise DomainError(f"invalid multiplicity {mult!r}")
    if isinstance(mult, float) and not math.isfinite(mult):
        raise DomainError(f"multiplicity must be finite, got {mult!r}")
    if mult < 0:
        raise DomainError(f"multiplicity must be nonnegative, got {mult!r}")
    return mult


def _uses_exact_path(profile, p):
    if p not in (1, INF):
        return False
    return all(exact_value(m) is not None for m in profile.counts.values())


def candidate_scores(profile, p):
    """Scores ``s_p(c, profile)`` of all candidates, as a list indexed by candidate.

    Entries are ``int``/``Fraction`` on the exact path and floats otherwise.
    """
    p = check_p(p)
    n = profile.n
    if _uses_exact_path(profile, p):
        scores = [0] * n
        for b, mult in profile.items():
            contribution = exact_value(mult) * lp_weight(len(b), p)
            for c in b:
                scores[c] += contribution
        return [s.numerator if isinstance(s, Fraction) and s.denominator == 1 else s
                for s in scores]
    terms = [[] for _ in range(n)]
    for b, mult in profile.items():
        contribution = float(mult) * float(lp_weight(len(b), p))
        for c in b:
            terms[c].append(contribution)
    return [math.fsum(t) for t in terms]


def score(candidate, profile, p):
    """Score of one candidate (index or name) as a float."""
    c = profile.index(candidate)
    return float(candidate_scores(profile, p)[c])


def committee_score(committee, profile, p):
    """Sum of the member scores of a committee, as a float."""
    members = [profile.index(c) for c in committee]
    scores = candidate_scores(profile, p)
    return _sum_scores(scores[c] for c in members)


def _sum_scores(values):
    values = list(values)
    if all(is_exact(v) for v in values):
        return float(sum(values))
    return math.fsum(float(v) for v in values)


def _check_winner_args(profile, k):
    if not isinstance(k, Integral) or isinstance(k, bool) or k < 1:
        raise DomainError(f"committee size must be a positive integer, got {k!r}")
    if k > profile.n:
        raise DomainError(f"committee size {k} exceeds the number of candidates {profile.n}")
    if not profile.total() > 0:
        raise DomainError("profile has no positive multiplicity")


def winners(profile, k, p):
    """All size-``k`` committees maximizing the total ``s_p`` score.

    Candidates are ranked by score; everyone strictly above the k-th score is
    in every winning committee, and the remaining seats are filled by every
    possible choice among the candidates tied with the k-th score.
    """
    p = check_p(p)
    _check_winner_args(profile, k)
    scores = candidate_scores(profile, p)
    return tier_winners(scores, k)


def tier_winners(scores, k):
    """Winning committees for fixed per-candidate scores (tier method)."""
    n = len(scores)
    order = sorted(range(n), key=lambda c: -float(scores[c]))
    threshold = scores[order[k - 1]]
    tied = [c for c in range(n) if is_close(scores[c], threshold)]
    above = [c for c in range(n) if scores[c] > threshold and not is_close(scores[c], threshold)]
    if len(above) >= k:
        raise InvariantError("tier construction placed k or more candidates above the threshold")
    base = frozenset(above)
    return frozenset(base | frozenset(extra) for extra in itertools.combinations(tied, k - len(above)))


def winners_bruteforce(profile, k, p):
    """Oracle for :func:`winners`: enumerate every committee and keep the maxima."""
    p = check_p(p)
    _check_winner_args(profile, k)
    if profile.n > MAX_BRUTEFORCE_CANDIDATES:
        raise ResourceError(
            f"brute force limited to {MAX_BRUTEFORCE_CANDIDATES} candidates, got {profile.n}"
        )
    scores = candidate_scores(profile, p)
    exact = all(is_exact(s) for s in scores)
    totals = {}
    for K in itertools.combinations(range(profile.n), k):
        if exact:
            totals[frozenset(K)] = sum(scores[c] for c in K)
        else:
            totals[frozenset(K)] = math.fsum(scores[c] for c in K)
    return argmax_set(totals)


def argmax_set(values):
    """Keys whose value ties with the maximum value."""
    best = max(values.values())
    return frozenset(key for key, v in values.items() if is_close(v, best))


def argmin_set(values):
    best = min(values.values())
    return frozenset(key for key, v in values.items() if is_close(v, best))


def all_committees(n, k):
    if not 1 <= k <= n:
        raise DomainError(f"committee size {k} must lie in [1, {n}]")
    return frozenset(frozenset(K) for K in itertools.combinations(range(n), k))


def winners_function(ballot, k, n):
    """Committees with maximal overlap ``min(|ballot|, k)`` with a ballot.

    The empty ballot yields every committee.
    """
    if not isinstance(k, Integral) or k < 1:
        raise DomainError(f"committee size must be a positive integer, got {k!r}")
    if k > n:
        raise DomainError(f"committee size {k} exceeds the number of candidates {n}")
    b = frozenset(ballot)
    if any(not 0 <= c < n for c in b):
        raise DomainError(f"ballot {sorted(b)} is not within {n} candidates")
    if len(b) >= k:
        return frozenset(frozenset(K) for K in itertools.combinations(sorted(b), k))
    rest = [c for c in range(n) if c not in b]
    return frozenset(b | frozenset(S) for S in itertools.combinations(rest, k - len(b)))


def all_ballots(n):
    """Every nonempty subset of ``range(n)``, by size and then lexicographically."""
    return [
        frozenset(b)
        for size in range(1, n + 1)
        for b in itertools.combinations(range(n), size)
    ]


def sorted_committees(outcome):
    """Deterministic listing of an outcome: sorted index tuples in lexicographic order."""
    return sorted(tuple(sorted(K)) for K in outcome)
