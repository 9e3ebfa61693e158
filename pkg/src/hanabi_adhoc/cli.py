"""Command-line entry point: ``hanabi-adhoc <command> [options]``.

Stages talk to each other through files (records JSONL, table CSV, BD
matrix CSV), so each one can be rerun on its own.  Exit status is 0 on
success, 1 for usage errors and 2 for bad or inconsistent data.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .agents import load_agents
from .analysis import (
    DEFAULT_LINKAGE,
    LINKAGES,
    DistanceMatrix,
    bd_matrix,
    bd_vs_adhoc,
    hierarchical_cluster,
    outcome_table,
    rule_similarity,
    sample_states,
    scatter_csv,
    self_play_records,
)
from .errors import AgentConfigError, HanabiError
from .harness import (
    PairwiseTable,
    ScoreSummary,
    play_game,
    read_records,
    run_tournament,
    verify_record,
    write_records,
)
from .rules import RANDOM_KINDS, THRESHOLDED, RuleKind, parse_rule

EXIT_OK, EXIT_USAGE, EXIT_DATA = 0, 1, 2

# every deterministic primitive, thresholded ones at the values the builtins use
DEFAULT_RULES = [
    k.value for k in RuleKind
    if k not in RANDOM_KINDS | THRESHOLDED and k is not RuleKind.PLAY_OLDEST_FIRST
] + ["PlayProbablySafeCard(0.6)", "DiscardProbablyUselessCard(0.99)"]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _agents(args):
    return load_agents(args.agents, timeout=args.timeout)


def _sample(args, agents):
    if args.records:
        records = read_records(args.records)
    else:
        records = self_play_records(agents, args.games, args.seed)
    return sample_states(records, args.max_states, args.seed)


# -- commands --------------------------------------------------------------------


def cmd_sim(args) -> int:
    agents = _agents(args)
    records = [play_game(agents, args.seed + i) for i in range(args.games)]
    if args.out:
        write_records(records, args.out)
    summary = ScoreSummary.from_records(records)
    print(json.dumps({"agents": [a.id for a in agents], **summary.to_dict()}, sort_keys=True))
    return EXIT_OK


def cmd_tournament(args) -> int:
    agents = _agents(args)
    records = [] if args.records_out else None
    table = run_tournament(
        agents, args.games, args.seed, fixed_order=args.fixed_order, jobs=args.jobs, records_out=records
    )
    if records is not None:
        write_records(records, args.records_out)
    if args.format == "json":
        _emit(json.dumps(table.to_dict(), indent=2, sort_keys=True) + "\n", args.out)
    else:
        _emit(table.to_csv(), args.out)
    return EXIT_OK


def _parse_groups(text: str | None) -> dict[str, str]:
    groups = {}
    for part in (text or "").split(","):
        if part.strip():
            name, sep, label = part.partition("=")
            if not sep:
                raise UsageError(f"bad group entry {part!r}; expected agent=label")
            groups[name.strip()] = label.strip()
    return groups


def cmd_classify(args) -> int:
    table = PairwiseTable.from_csv(Path(args.table).read_text())
    counts = outcome_table(table, _parse_groups(args.groups))
    if args.format == "csv":
        lines = ["group,Failure,Success,Synergy"]
        lines += [f"{g},{c['Failure']},{c['Success']},{c['Synergy']}" for g, c in sorted(counts.items())]
        _emit("\n".join(lines) + "\n", args.out)
    else:
        _emit(json.dumps(counts, indent=2, sort_keys=True) + "\n", args.out)
    return EXIT_OK


def cmd_bd(args) -> int:
    agents = _agents(args)
    sample = _sample(args, agents)
    matrix = bd_matrix(agents, sample)
    if args.format == "json":
        _emit(json.dumps({**matrix.to_dict(), "N": sample.N}, indent=2) + "\n", args.out)
    else:
        _emit(matrix.to_csv(), args.out)
    return EXIT_OK


def cmd_cluster(args) -> int:
    matrix = DistanceMatrix.from_csv(Path(args.matrix).read_text())
    dendrogram = hierarchical_cluster(matrix, args.linkage)
    _emit(dendrogram.to_json() + "\n", args.out)
    return EXIT_OK


def cmd_corr(args) -> int:
    table = PairwiseTable.from_csv(Path(args.table).read_text())
    matrix = DistanceMatrix.from_csv(Path(args.matrix).read_text())
    points, r = bd_vs_adhoc(table, matrix)
    if args.format == "json":
        payload = {"r": r, "points": [p._asdict() for p in points]}
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        _emit(scatter_csv(points), args.out)
        print(f"r = {r:.6f}", file=sys.stderr)
    return EXIT_OK


def cmd_rulesim(args) -> int:
    agents = _agents(args)
    try:
        rules = [parse_rule(r) for r in (args.rules or DEFAULT_RULES)]
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if any(r.is_random for r in rules):
        raise UsageError("random rules cannot be compared")
    sample = _sample(args, agents)
    rows = [
        (agent.id, rule_similarity(rule, agent, sample, args.per_rule_cap))
        for agent in agents
        for rule in rules
    ]
    if args.format == "json":
        payload = [{"agent": a, **s._asdict()} for a, s in rows]
        _emit(json.dumps(payload, indent=2) + "\n", args.out)
    else:
        lines = ["agent,rule,similarity,states"]
        lines += [f"{a},{s.rule},{s.similarity!r},{s.states}" for a, s in rows]
        _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_replay(args) -> int:
    records = read_records(args.records)
    bad = [r.seed for r in records if not verify_record(r)]
    print(f"{len(records) - len(bad)}/{len(records)} records replay to their stored score")
    if bad:
        print("mismatched seeds: " + ",".join(map(str, bad)), file=sys.stderr)
        return EXIT_DATA
    return EXIT_OK


# -- parser ------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="hanabi-adhoc", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p, agents=True, games=True, fmt=False):
        p.add_argument("--seed", type=int, default=0)
        if agents:
            p.add_argument("--agents", required=True, help="comma-separated names or a JSON config")
            p.add_argument("--timeout", type=float, default=10.0, help="external agent reply timeout (s)")
        if games:
            p.add_argument("--games", type=_positive, default=1000)
        if fmt:
            p.add_argument("--format", choices=("csv", "json"), default="csv")
        p.add_argument("--out")

    p = sub.add_parser("sim", help="play games with a fixed seating")
    common(p)
    p.set_defaults(func=cmd_sim)

    p = sub.add_parser("tournament", help="all self-play and ad-hoc pairings")
    common(p, fmt=True)
    p.add_argument("--jobs", type=_positive, default=1)
    p.add_argument("--fixed-order", action="store_true", help="do not alternate seats")
    p.add_argument("--records-out", help="also write every game record (JSONL)")
    p.set_defaults(func=cmd_tournament)

    p = sub.add_parser("classify", help="outcome counts from a tournament table")
    common(p, agents=False, games=False, fmt=True)
    p.add_argument("--table", required=True)
    p.add_argument("--groups", help="agent=label list, e.g. rainbow1=Rainbow")
    p.set_defaults(func=cmd_classify)

    for name, func, help_text in (
        ("bd", cmd_bd, "behavioral-difference matrix"),
        ("rulesim", cmd_rulesim, "rule-trigger similarity"),
    ):
        p = sub.add_parser(name, help=help_text)
        common(p, fmt=True)
        p.add_argument("--records", help="sample from these games instead of fresh self-play")
        p.add_argument("--max-states", type=_positive, default=20000)
        if name == "rulesim":
            p.add_argument("--rules", type=lambda s: [r for r in s.split(";") if r.strip()],
                           help="semicolon-separated rule names")
            p.add_argument("--per-rule-cap", type=_positive, default=1000)
        p.set_defaults(func=func)

    p = sub.add_parser("cluster", help="dendrogram of a BD matrix")
    common(p, agents=False, games=False)
    p.add_argument("--matrix", required=True)
    p.add_argument("--linkage", choices=LINKAGES, default=DEFAULT_LINKAGE)
    p.set_defaults(func=cmd_cluster)

    p = sub.add_parser("corr", help="BD against ad-hoc score")
    common(p, agents=False, games=False, fmt=True)
    p.add_argument("--table", required=True)
    p.add_argument("--matrix", required=True)
    p.set_defaults(func=cmd_corr)

    p = sub.add_parser("replay", help="check that records replay to their scores")
    common(p, agents=False, games=False)
    p.add_argument("--records", required=True)
    p.set_defaults(func=cmd_replay)
    return parser


def _positive(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1: {text}")
    return value


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(f"hanabi-adhoc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except (UsageError, AgentConfigError) as exc:
        print(f"hanabi-adhoc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (HanabiError, ValueError, OSError) as exc:
        print(f"hanabi-adhoc: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
