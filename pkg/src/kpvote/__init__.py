"""k,p-approval voting: L^p-normalized approval ballots and committee selection."""

from .core import (
    INF,
    DomainError,
    InvariantError,
    KPVoteError,
    Profile,
    ResourceError,
    candidate_scores,
    committee_score,
    lp_weight,
    parse_p,
    score,
    sorted_committees,
    winners,
    winners_bruteforce,
    winners_function,
)

__version__ = "0.1.0"
