"""Utility-maximization and maximum-likelihood views of k,p-approval voting."""

import itertools
import math
from dataclasses import dataclass

from .core import (
    INF,
    MAX_BRUTEFORCE_CANDIDATES,
    DomainError,
    InvariantError,
    ResourceError,
    all_ballots,
    argmax_set,
    check_p,
    is_close,
    lp_weight,
)

# Largest number of (committee, ballot) pairs summed when checking that the
# normalizer Z(K) does not depend on K.
MAX_NORMALIZER_CHECK = 2_000_000


@dataclass(frozen=True)
class UtilityParams:
    """``U(b, K) = U0 + (alpha |b & K| + beta |b - K|) / |b|^(1/p)`` with alpha > beta."""

    U0: float
    alpha: float
    beta: float
    p: float

    def __post_init__(self):
        object.__setattr__(self, "p", check_p(self.p))
        if not self.alpha > self.beta:
            raise DomainError(f"utility needs alpha > beta, got alpha={self.alpha}, beta={self.beta}")

    def __call__(self, ballot, committee):
        return utility_value(ballot, committee, self)


@dataclass(frozen=True)
class SequentialParams:
    """Per-candidate approval probabilities: ``p1`` inside the committee, ``p2`` outside."""

    p1: float
    p2: float

    def __post_init__(self):
        if not 0 < self.p2 < self.p1 < 1:
            raise DomainError(f"sequential model needs 0 < p2 < p1 < 1, got p1={self.p1}, p2={self.p2}")


def utility_value(ballot, committee, params):
    b = frozenset(ballot)
    if not b:
        raise DomainError("ballots must approve of at least one candidate")
    inside = len(b & frozenset(committee))
    outside = len(b) - inside
    weight = float(lp_weight(len(b), params.p))
    return params.U0 + (params.alpha * inside + params.beta * outside) * weight


def _committees(n, k):
    if not 1 <= k <= n:
        raise DomainError(f"committee size {k} must lie in [1, {n}]")
    if n > MAX_BRUTEFORCE_CANDIDATES:
        raise ResourceError(
            f"committee enumeration limited to {MAX_BRUTEFORCE_CANDIDATES} candidates, got {n}"
        )
    return [frozenset(K) for K in itertools.combinations(range(n), k)]


def um_winners(profile, k, utility):
    """Committees maximizing ``sum_b profile[b] * utility(b, K)``."""
    if not profile.total() > 0:
        raise DomainError("profile has no positive multiplicity")
    entries = [(b, float(m)) for b, m in profile.items()]
    totals = {
        K: math.fsum(m * utility(b, K) for b, m in entries)
        for K in _committees(profile.n, k)
    }
    return argmax_set(totals)


@dataclass(frozen=True)
class ReducedUtility:
    """Two-term utility obtained from the four-term family.

    ``params`` carries the ballot-independent ``alpha' = alpha - gamma`` and
    ``beta' = beta - delta``; ``offset_numerator`` is ``gamma k + delta (m - k)``,
    which adds ``offset_numerator / |b|^(1/p)`` to ``U0`` for ballot ``b``.
    """

    params: UtilityParams
    offset_numerator: float

    def offset(self, ballot):
        return self.offset_numerator * float(lp_weight(len(ballot), self.params.p))

    def __call__(self, ballot, committee):
        return utility_value(ballot, committee, self.params) + self.offset(ballot)


def generalized_utility(U0, alpha, beta, gamma, delta, k, m, p):
    """Four-term utility that also rewards committee members and other candidates
    left off the ballot; ``m`` is the number of candidates."""
    p = check_p(p)

    def utility(ballot, committee):
        b = frozenset(ballot)
        w = len(b & frozenset(committee))
        ell = len(b) - w
        weight = float(lp_weight(len(b), p))
        return U0 + (alpha * w + beta * ell + gamma * (k - w) + delta * (m - k - ell)) * weight

    return utility


def generalized_utility_reduce(U0, alpha, beta, gamma, delta, k, m, p):
    """Fold the ``gamma``/``delta`` terms of :func:`generalized_utility` into the two-term family."""
    reduced_alpha = alpha - gamma
    reduced_beta = beta - delta
    if not reduced_alpha > reduced_beta:
        raise DomainError(
            f"reduced utility needs alpha - gamma > beta - delta, got "
            f"{reduced_alpha} <= {reduced_beta}"
        )
    params = UtilityParams(U0=U0, alpha=reduced_alpha, beta=reduced_beta, p=p)
    return ReducedUtility(params=params, offset_numerator=gamma * k + delta * (m - k))


class NoiseModel:
    """Committee-conditioned distribution over nonempty ballots.

    Parameters
    ----------
    n, k : int
        Number of candidates and committee size.
    log_evaluator : callable
        ``log_evaluator(committee, ballot)`` returns the log of the
        unnormalized probability, or ``-inf`` for probability zero.
    name : str
        Label used in reports.
    symmetric : bool
        Whether the normalizer is claimed to be the same for every committee.
        Symmetric models verify the claim on construction (all committees when
        the enumeration is small enough, otherwise a spread sample).
    """

    def __init__(self, n, k, log_evaluator, name="custom", symmetric=False):
        self.n = n
        self.k = k
        self.name = name
        self.symmetric = symmetric
        self._log_evaluator = log_evaluator
        self._ballots = None
        self._normalizers = {}
        _committees(n, k)
        if symmetric:
            self.check_normalizer()

    def log_unnormalized(self, committee, ballot):
        return self._log_evaluator(frozenset(committee), frozenset(ballot))

    def unnormalized(self, committee, ballot):
        return math.exp(self.log_unnormalized(committee, ballot))

    @property
    def ballots(self):
        if self._ballots is None:
            self._ballots = all_ballots(self.n)
        return self._ballots

    def normalizer(self, committee):
        """``Z(K)``, the total unnormalized mass over nonempty ballots."""
        K = frozenset(committee)
        if self.symmetric and self._normalizers:
            return next(iter(self._normalizers.values()))
        if K not in self._normalizers:
            self._normalizers[K] = math.fsum(self.unnormalized(K, b) for b in self.ballots)
        return self._normalizers[K]

    def log_normalizer(self, committee):
        return math.log(self.normalizer(committee))

    def probability(self, committee, ballot):
        return self.unnormalized(committee, ballot) / self.normalizer(committee)

    def log_probability(self, committee, ballot):
        return self.log_unnormalized(committee, ballot) - self.log_normalizer(committee)

    def normalizers(self, committees=None):
        """Map committee -> Z(K), computed independently for each committee."""
        if committees is None:
            committees = _checked_committees(self.n, self.k)
        return {
            K: math.fsum(self.unnormalized(K, b) for b in self.ballots) for K in committees
        }

    def check_normalizer(self):
        """Verify Z(K) is the same for the checked committees; return the common value."""
        values = self.normalizers()
        reference = next(iter(values.values()))
        for K, z in values.items():
            if not is_close(z, reference):
                raise InvariantError(
                    f"normalizer of {self.name} depends on the committee: "
                    f"Z({sorted(K)}) = {z!r} vs {reference!r}"
                )
        self._normalizers = {next(iter(values)): reference}
        return reference


def _checked_committees(n, k):
    committees = _committees(n, k)
    budget = max(1, MAX_NORMALIZER_CHECK // (2 ** n - 1))
    if len(committees) <= budget:
        return committees
    step = len(committees) / budget
    return [committees[int(i * step)] for i in range(budget)] + [committees[-1]]


def kp_noise_model(p, alpha, beta, n, k):
    """``P(K, b) ~ alpha^(|b & K| / |b|^(1/p)) * beta^(|b - K| / |b|^(1/p))``.

    ``alpha == beta`` is accepted as the degenerate model in which no committee
    is more likely than another.
    """
    p = check_p(p)
    if not (alpha > 0 and beta > 0):
        raise DomainError(f"noise model needs alpha, beta > 0, got alpha={alpha}, beta={beta}")
    if alpha < beta:
        raise DomainError(f"noise model needs alpha >= beta, got alpha={alpha}, beta={beta}")
    log_alpha, log_beta = math.log(alpha), math.log(beta)

    def log_evaluator(committee, ballot):
        inside = len(ballot & committee)
        weight = float(lp_weight(len(ballot), p))
        return (inside * log_alpha + (len(ballot) - inside) * log_beta) * weight

    return NoiseModel(n, k, log_evaluator, name=f"kp(p={p}, alpha={alpha}, beta={beta})",
                      symmetric=True)


def sequential_noise_model(n, k, params):
    """Voter approves each committee member w.p. ``p1`` and each other candidate w.p. ``p2``.

    The product form is left unnormalized over nonempty ballots, so ``Z(K)``
    equals ``1 - (1 - p1)^k (1 - p2)^(n - k)``.
    """
    if not isinstance(params, SequentialParams):
        params = SequentialParams(*params)
    p1, p2 = params.p1, params.p2
    logs = (math.log(p1), math.log1p(-p1), math.log(p2), math.log1p(-p2))

    def log_evaluator(committee, ballot):
        w = len(ballot & committee)
        ell = len(ballot) - w
        return w * logs[0] + (k - w) * logs[1] + ell * logs[2] + (n - k - ell) * logs[3]

    return NoiseModel(n, k, log_evaluator, name=f"sequential(p1={p1}, p2={p2})", symmetric=True)


def sequential_mass(n, k, params):
    """Closed-form total mass of the sequential model over nonempty ballots."""
    return 1 - (1 - params.p1) ** k * (1 - params.p2) ** (n - k)


def mle_winners(profile, k, model):
    """Committees maximizing the log-likelihood ``sum_b profile[b] * ln P(K, b)``."""
    if model.n != profile.n or model.k != k:
        raise DomainError(
            f"model is for n={model.n}, k={model.k}; profile has n={profile.n}, k={k}"
        )
    if not profile.total() > 0:
        raise DomainError("profile has no positive multiplicity")
    entries = [(b, float(m)) for b, m in profile.items() if m > 0]
    mass = math.fsum(m for _, m in entries)
    loglik = {}
    for K in _committees(profile.n, k):
        terms = [m * model.log_unnormalized(K, b) for b, m in entries]
        if any(t == -INF for t in terms):
            loglik[K] = -INF
            continue
        loglik[K] = math.fsum(terms) - mass * model.log_normalizer(K)
    finite = {K: v for K, v in loglik.items() if v != -INF}
    if not finite:
        return frozenset(loglik)
    return argmax_set(finite)


def noise_from_utility(utility, n, k):
    """Noise model ``P(K, b) = exp(U(b, K)) / Z``; requires a committee-independent ``Z``."""
    model = NoiseModel(n, k, lambda K, b: utility(b, K), name="from-utility")
    values = model.normalizers()
    reference = next(iter(values.values()))
    for K, z in values.items():
        if not is_close(z, reference):
            raise DomainError(
                f"exp(U) has a committee-dependent normalizer (Z({sorted(K)}) = {z!r} vs "
                f"{reference!r}); the UM/MLE correspondence is not guaranteed"
            )
    model.symmetric = True
    model._normalizers = {next(iter(values)): reference}
    return model


def utility_from_noise(model):
    """Utility ``U(b, K) = ln P(K, b)``; the model must be strictly positive."""

    def utility(ballot, committee):
        value = model.log_probability(committee, ballot)
        if value == -INF:
            raise DomainError(
                f"noise model assigns probability zero to ballot {sorted(ballot)} "
                f"under committee {sorted(committee)}"
            )
        return value

    return utility
