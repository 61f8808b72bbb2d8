"""Command-line interface: ``kpvote {winners,sweep,audit,distrat,falsify,umle}``.

Exit codes: 0 success, 1 counterexample/witness found (audit, falsify),
2 input file error, 3 invalid flags. Errors are reported as a single line on
stderr: ``kpvote: <category>: <kind>: <message>``.
"""

import argparse
import os
import sys

from . import axioms, decision, distrat
from .core import (
    INF,
    DomainError,
    KPVoteError,
    ResourceError,
    candidate_scores,
    check_p,
    number_value,
    parse_p,
    sorted_committees,
    winners,
)
from .formats import ParseError, dump_json, dump_tsv, load_election, load_profile

EXIT_WITNESS = 1
EXIT_PARSE = 2
EXIT_USAGE = 3

SEED_ENV = "KPVOTE_SEED"


class UsageError(KPVoteError):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _p_value(text):
    try:
        return parse_p(text)
    except DomainError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _p_list(text):
    return [_p_value(token) for token in text.split(",")]


def _default_seed():
    raw = os.environ.get(SEED_ENV)
    if raw is None:
        return 0
    try:
        return int(raw)
    except ValueError:
        raise UsageError(f"{SEED_ENV} must be an integer, got {raw!r}") from None


def build_parser():
    parser = _Parser(prog="kpvote", description="k,p-approval voting toolkit")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def output_flag(cmd):
        cmd.add_argument("--format", choices=("json", "tsv"), default="json")

    cmd = sub.add_parser("winners", help="scores and winning committees of a profile")
    cmd.add_argument("--profile", required=True)
    cmd.add_argument("--k", type=int, required=True)
    cmd.add_argument("--p", type=_p_value, required=True)
    output_flag(cmd)

    cmd = sub.add_parser("sweep", help="winners for several norm exponents")
    cmd.add_argument("--profile", required=True)
    cmd.add_argument("--k", type=int, required=True)
    cmd.add_argument("--p", type=_p_list, required=True, help="comma-separated list, e.g. 1,2,inf")
    output_flag(cmd)

    cmd = sub.add_parser("audit", help="search for axiom violations")
    cmd.add_argument("--axiom", required=True)
    cmd.add_argument("--k", type=int, required=True)
    cmd.add_argument("--p", type=_p_value, required=True)
    cmd.add_argument("--n", type=int, required=True)
    cmd.add_argument("--trials", type=int, default=1000)
    cmd.add_argument("--seed", type=int, default=None)
    cmd.add_argument("--rule", default="builtin",
                     help="builtin or one of: " + ", ".join(axioms.BROKEN_RULES))
    cmd.add_argument("--rule-p", type=_p_value, default=None,
                     help="exponent used by the builtin rule (defaults to --p)")
    cmd.add_argument("--max-multiplicity", type=int, default=10)
    output_flag(cmd)

    cmd = sub.add_parser("distrat", help="distance-rationalization scores of an election")
    cmd.add_argument("--election", required=True)
    cmd.add_argument("--metric", choices=("symdiff", "layer"), required=True)
    cmd.add_argument("--k", type=int, required=True)
    cmd.add_argument("--p", type=_p_value, default=INF)
    output_flag(cmd)

    cmd = sub.add_parser("falsify", help="look for an election where DR and F_{k,p} disagree")
    cmd.add_argument("--election", default=None,
                     help="election file; the impossibility construction is used when omitted")
    cmd.add_argument("--metric", choices=("symdiff", "layer"), required=True)
    cmd.add_argument("--k", type=int, required=True)
    cmd.add_argument("--p", type=_p_value, required=True)
    cmd.add_argument("--n", type=int, default=None)
    output_flag(cmd)

    cmd = sub.add_parser("umle", help="compare UM, MLE and F_{k,p} outcomes")
    cmd.add_argument("--profile", required=True)
    cmd.add_argument("--k", type=int, required=True)
    cmd.add_argument("--p", type=_p_value, default=None)
    cmd.add_argument("--alpha", type=float, default=None)
    cmd.add_argument("--beta", type=float, default=None)
    cmd.add_argument("--p1", type=float, default=None)
    cmd.add_argument("--p2", type=float, default=None)
    output_flag(cmd)
    return parser


# -- serialization helpers ----------------------------------------------------


def _committees(outcome, candidates):
    return [[candidates[i] for i in K] for K in sorted_committees(outcome)]


def _scores(profile, p):
    scores = candidate_scores(profile, p)
    return {name: number_value(s) for name, s in zip(profile.candidates, scores)}


def _profile_json(profile):
    return {
        "candidates": list(profile.candidates),
        "entries": [[number_value(m), profile.names(b)] for b, m in profile.sorted_items()],
    }


def _witness_json(witness, candidates):
    out = {}
    for key, value in witness.items():
        if key in ("profile", "other"):
            out[key] = _profile_json(value)
        elif key in ("expected", "got"):
            out[key] = _committees(value, candidates)
        elif key == "ballot":
            out[key] = [candidates[i] for i in sorted(value)]
        elif key == "ballots":
            out[key] = [[candidates[i] for i in sorted(b)] for b in value]
        elif key == "scale":
            out[key] = number_value(value)
    return out


def _emit(document, rows, fmt, out):
    out.write(dump_json(document) if fmt == "json" else dump_tsv(rows))


def _p_json(p):
    return "inf" if p == INF else number_value(p)


def _check_k(k, n):
    if not 1 <= k <= n:
        raise DomainError(f"--k must lie in [1, {n}], got {k}")


# -- commands -------------------------------------------------------------------


def _winners_block(profile, k, p):
    return {
        "p": _p_json(p),
        "scores": _scores(profile, p),
        "winners": _committees(winners(profile, k, p), profile.candidates),
    }


def _winners_rows(block):
    rows = [("score", block["p"], name, value) for name, value in block["scores"].items()]
    rows += [("winner", block["p"], ",".join(K)) for K in block["winners"]]
    return rows


def cmd_winners(args, out):
    profile = load_profile(args.profile)
    _check_k(args.k, profile.n)
    block = _winners_block(profile, args.k, args.p)
    document = {"command": "winners", "k": args.k, **block}
    _emit(document, _winners_rows(block), args.format, out)
    return 0


def cmd_sweep(args, out):
    profile = load_profile(args.profile)
    _check_k(args.k, profile.n)
    blocks = [_winners_block(profile, args.k, p) for p in args.p]
    document = {"command": "sweep", "k": args.k, "results": blocks}
    rows = [row for block in blocks for row in _winners_rows(block)]
    _emit(document, rows, args.format, out)
    return 0


def cmd_audit(args, out):
    axiom = axioms.AxiomId.parse(args.axiom)
    rule = axioms.get_rule(args.rule, args.rule_p)
    seed = args.seed if args.seed is not None else _default_seed()
    if args.trials < 0:
        raise DomainError("--trials must be nonnegative")
    report = axioms.audit(rule, axiom, args.k, args.p, args.n, trials=args.trials,
                          seed=seed, max_multiplicity=args.max_multiplicity)
    candidates = [f"c{i + 1}" for i in range(args.n)]
    witness = None if report.witness is None else _witness_json(report.witness, candidates)
    document = {
        "command": "audit",
        "axiom": axiom.value,
        "rule": args.rule,
        "rule_p": None if args.rule_p is None else _p_json(args.rule_p),
        "k": args.k,
        "p": _p_json(args.p),
        "n": args.n,
        "seed": seed,
        "verdict": report.verdict,
        "checked": report.trials,
        "witness": witness,
    }
    rows = [("verdict", report.verdict), ("checked", report.trials)]
    if witness is not None:
        rows += [("witness", key, dump_json(value).replace("\n", " ").strip())
                 for key, value in witness.items()]
    _emit(document, rows, args.format, out)
    return 0 if report.passed else EXIT_WITNESS


def _metric(name, p, n):
    if name == "symdiff":
        return distrat.BallotMetric.symdiff(n)
    return distrat.BallotMetric.layer(p, n)


def cmd_distrat(args, out):
    election = load_election(args.election)
    _check_k(args.k, election.n)
    metric = _metric(args.metric, args.p, election.n)
    result = distrat.dr_winners(election, args.k, metric)
    names = election.candidates
    scores = [
        {"committee": [names[i] for i in K], "distance": number_value(result.scores[frozenset(K)])}
        for K in sorted_committees(result.scores)
    ]
    nearest = [
        {"committee": [names[i] for i in K], "votes": result.nearest[frozenset(K)].named_votes()}
        for K in sorted_committees(result.nearest)
    ]
    document = {
        "command": "distrat",
        "metric": args.metric,
        "k": args.k,
        "p": _p_json(args.p),
        "scores": scores,
        "winners": _committees(result.winners, names),
        "nearest": nearest,
    }
    rows = [("score", ",".join(s["committee"]), s["distance"]) for s in scores]
    rows += [("winner", ",".join(K)) for K in document["winners"]]
    _emit(document, rows, args.format, out)
    return 0


def cmd_falsify(args, out):
    if args.election is not None:
        elections = [load_election(args.election)]
        source = "file"
    else:
        n = args.n if args.n is not None else args.k + 1
        elections = [distrat.construct_counterexample(args.k, args.p, n)[0]]
        source = "constructed"
    _check_k(args.k, elections[0].n)
    metric = _metric(args.metric, args.p, elections[0].n)
    found = distrat.falsify_metric(metric, args.k, args.p, elections)
    witness = None
    if found is not None:
        names = found.election.candidates
        witness = {
            "candidates": list(names),
            "votes": found.election.named_votes(),
            "dr_winners": _committees(found.dr_winners, names),
            "rule_winners": _committees(found.rule_winners, names),
        }
    document = {
        "command": "falsify",
        "metric": args.metric,
        "k": args.k,
        "p": _p_json(args.p),
        "source": source,
        "witness": witness,
    }
    if witness is None:
        rows = [("none",)]
    else:
        rows = [("vote", ",".join(v)) for v in witness["votes"]]
        rows += [("dr_winner", ",".join(K)) for K in witness["dr_winners"]]
        rows += [("rule_winner", ",".join(K)) for K in witness["rule_winners"]]
    _emit(document, rows, args.format, out)
    return 0 if witness is None else EXIT_WITNESS


def cmd_umle(args, out):
    kp_flags = args.alpha is not None or args.beta is not None
    seq_flags = args.p1 is not None or args.p2 is not None
    if kp_flags == seq_flags:
        raise UsageError("give either --alpha/--beta or --p1/--p2")
    profile = load_profile(args.profile)
    _check_k(args.k, profile.n)
    if kp_flags:
        if args.alpha is None or args.beta is None or args.p is None:
            raise UsageError("--alpha, --beta and --p are required together")
        if not args.alpha > args.beta > 0:
            raise DomainError(f"need --alpha > --beta > 0, got {args.alpha} and {args.beta}")
        p = check_p(args.p)
        utility = decision.UtilityParams(U0=0, alpha=args.alpha, beta=args.beta, p=p)
        model = decision.kp_noise_model(p, args.alpha, args.beta, profile.n, args.k)
        params = {"model": "kp", "alpha": args.alpha, "beta": args.beta}
    else:
        if args.p1 is None or args.p2 is None:
            raise UsageError("--p1 and --p2 are required together")
        if args.p is not None and args.p != INF:
            raise DomainError("the sequential model corresponds to --p inf")
        p = INF
        seq = decision.SequentialParams(args.p1, args.p2)
        model = decision.sequential_noise_model(profile.n, args.k, seq)
        utility = decision.utility_from_noise(model)
        params = {"model": "sequential", "p1": args.p1, "p2": args.p2}
    names = profile.candidates
    um = _committees(decision.um_winners(profile, args.k, utility), names)
    mle = _committees(decision.mle_winners(profile, args.k, model), names)
    rule = _committees(winners(profile, args.k, p), names)
    document = {
        "command": "umle",
        "k": args.k,
        "p": _p_json(p),
        **params,
        "um_winners": um,
        "mle_winners": mle,
        "rule_winners": rule,
        "agree": um == mle == rule,
    }
    rows = [(label, ",".join(K)) for label, outcome in
            (("um", um), ("mle", mle), ("rule", rule)) for K in outcome]
    _emit(document, rows, args.format, out)
    return 0


COMMANDS = {
    "winners": cmd_winners,
    "sweep": cmd_sweep,
    "audit": cmd_audit,
    "distrat": cmd_distrat,
    "falsify": cmd_falsify,
    "umle": cmd_umle,
}


def _fail(category, kind, message, code, err):
    err.write(f"kpvote: {category}: {kind}: {' '.join(str(message).split())}\n")
    return code


def main(argv=None, out=None, err=None):
    out = sys.stdout if out is None else out
    err = sys.stderr if err is None else err
    try:
        args = build_parser().parse_args(argv)
        return COMMANDS[args.command](args, out)
    except UsageError as exc:
        return _fail("usage-error", "invalid-flags", exc, EXIT_USAGE, err)
    except ParseError as exc:
        return _fail("parse-error", exc.kind, exc, EXIT_PARSE, err)
    except OSError as exc:
        return _fail("parse-error", "unreadable-file", exc, EXIT_PARSE, err)
    except (DomainError, ResourceError) as exc:
        return _fail("usage-error", "invalid-value", exc, EXIT_USAGE, err)


if __name__ == "__main__":
    sys.exit(main())
