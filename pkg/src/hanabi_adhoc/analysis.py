"""Post-hoc analysis of agents and tournaments.

Outcome classes compare an ad-hoc score with the two self-play scores.
Behavioral difference (BD) counts how often two agents pick different
actions over a shared sample of observations; it is reported on the
one-hot L1 scale (two per disagreement) and normalized by sample size.
The BD matrix can be clustered and correlated with ad-hoc scores.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
import statistics
from dataclasses import dataclass, field
from enum import Enum
from typing import NamedTuple, Sequence

from .agents import BUILTIN_ORDERINGS, AgentHandle
from .engine import Observation, action_index, apply_move, move_from_index, new_game, observe
from .errors import (
    AlignmentError,
    CorruptRecordError,
    HanabiError,
    IncompatibleAgentsError,
    IncompleteTableError,
    InvalidInputError,
    InvalidMatrixError,
    UndefinedCorrelationError,
)
from .harness import GameRecord, PairwiseTable, pairing_records, self_play_partner
from .protocol import observation_rng
from .rng import SplitMix64
from .rules import Rule, evaluate_rule, rule_triggers

log = logging.getLogger(__name__)

LINKAGES = ("single", "complete", "average")
DEFAULT_LINKAGE = "average"


# -- outcome classes --------------------------------------------------------------


class OutcomeClass(Enum):
    FAILURE = "Failure"
    SUCCESS = "Success"
    SYNERGY = "Synergy"


def classify_outcome(adhoc: float, self1: float, self2: float) -> OutcomeClass:
    """Failure below both self-play means, Synergy above both, Success otherwise.

    Both bounds are inclusive for Success.
    """
    values = (adhoc, self1, self2)
    if not all(isinstance(v, (int, float)) and math.isfinite(v) for v in values):
        raise InvalidInputError(f"scores must be finite, got {values}")
    lo, hi = min(self1, self2), max(self1, self2)
    if adhoc < lo:
        return OutcomeClass.FAILURE
    if adhoc > hi:
        return OutcomeClass.SYNERGY
    return OutcomeClass.SUCCESS


def _group_label(a: str, b: str) -> str:
    if a == b:
        return a
    return "+".join(sorted((a, b)))


def default_group(agent_id: str) -> str:
    return "Rule-based" if agent_id.lower() in BUILTIN_ORDERINGS else "External"


def outcome_table(table: PairwiseTable, groups: dict[str, str] | None = None) -> dict[str, dict[str, int]]:
    """Outcome counts per agent group over every off-diagonal pairing.

    ``groups`` maps agent ids to labels (default: builtin agents are
    ``Rule-based``, anything else ``External``).  A mixed pairing is counted
    under both labels joined by ``+``, e.g. ``External+Rule-based``.
    """
    groups = groups or {}
    ids = table.agents
    for i, name in enumerate(ids):
        if not table.has(i, i):
            raise IncompleteTableError(f"no self-play entry for {name!r}")
    counts: dict[str, dict[str, int]] = {}
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            if not table.has(i, j):
                raise IncompleteTableError(f"no entry for {ids[i]!r} with {ids[j]!r}")
            cls = classify_outcome(table.mean(i, j), table.mean(i, i), table.mean(j, j))
            ga = groups.get(ids[i], default_group(ids[i]))
            gb = groups.get(ids[j], default_group(ids[j]))
            bucket = counts.setdefault(_group_label(ga, gb), {c.value: 0 for c in OutcomeClass})
            bucket[cls.value] += 1
    return counts


# -- state samples ------------------------------------------------------------------


class SampledState(NamedTuple):
    obs: Observation
    game: int
    turn: int


@dataclass
class StateSample:
    states: list[SampledState] = field(default_factory=list)

    @property
    def N(self) -> int:
        return len(self.states)

    def __len__(self) -> int:
        return len(self.states)

    def observations(self) -> list[Observation]:
        return [s.obs for s in self.states]


def sample_states(records: Sequence[GameRecord], max_states: int, seed: int) -> StateSample:
    """Acting-player observations from replayed games, subsampled uniformly.

    ``game`` in each sampled state is the record's position in ``records``.
    """
    if max_states < 1:
        raise InvalidInputError("max_states must be at least 1")
    total = sum(len(r.moves) for r in records)
    if total <= max_states:
        wanted = None
    else:
        wanted = set(SplitMix64(seed).sample_indices(total, max_states))
    out = []
    position = 0
    for game, record in enumerate(records):
        span = range(position, position + len(record.moves))
        position += len(record.moves)
        if wanted is not None and not any(i in wanted for i in span):
            continue
        try:
            state = new_game(record.num_players, record.seed)
            for turn, (player, index) in enumerate(record.moves):
                if player != state.current_player:
                    raise CorruptRecordError(f"player {player} moved out of turn at turn {turn}")
                obs = observe(state, player)
                move = move_from_index(index, record.num_players, obs.hand_size)
                if move not in obs.legal_moves:
                    raise CorruptRecordError(f"illegal move {move} at turn {turn}")
                if wanted is None or span[turn] in wanted:
                    out.append(SampledState(obs, game, turn))
                state, _ = apply_move(state, move)
        except CorruptRecordError as exc:
            raise CorruptRecordError(f"game {game} (seed {record.seed}): {exc}") from None
        except HanabiError as exc:
            raise CorruptRecordError(f"game {game} (seed {record.seed}): {exc}") from None
    return StateSample(out)


def self_play_records(agents: Sequence[AgentHandle], games_per_agent: int, base_seed: int) -> list[GameRecord]:
    """Self-play games of every agent, the same number each, pooled in agent order."""
    records = []
    for agent in agents:
        records.extend(pairing_records(agent, self_play_partner(agent), games_per_agent, base_seed))
    return records


# -- behavioral difference ---------------------------------------------------------


class BehavioralDifference(NamedTuple):
    bd: int
    disagreements: int
    normalized: float


def agent_actions(agent: AgentHandle, sample: StateSample) -> list[int]:
    """The action index ``agent`` picks on each sampled state."""
    out = []
    for state in sample.states:
        obs = state.obs
        move = agent.decide(obs, observation_rng(obs))
        if move not in obs.legal_moves:
            raise IncompatibleAgentsError(
                f"agent {agent.id!r} cannot act in game {state.game} turn {state.turn}: chose {move}"
            )
        out.append(action_index(move, obs.num_players, obs.hand_size))
    return out


def _check_action_space(a: AgentHandle, b: AgentHandle) -> None:
    sa, sb = getattr(a, "action_space", None), getattr(b, "action_space", None)
    if sa is not None and sb is not None and sa != sb:
        raise IncompatibleAgentsError(f"action spaces differ: {a.id!r} has {sa}, {b.id!r} has {sb}")


def bd_from_actions(xs: Sequence[int], ys: Sequence[int]) -> BehavioralDifference:
    if len(xs) != len(ys):
        raise InvalidInputError("action sequences differ in length")
    disagreements = sum(1 for x, y in zip(xs, ys) if x != y)
    normalized = disagreements / len(xs) if xs else 0.0
    return BehavioralDifference(2 * disagreements, disagreements, normalized)


def behavioral_difference(a: AgentHandle, b: AgentHandle, sample: StateSample) -> BehavioralDifference:
    _check_action_space(a, b)
    return bd_from_actions(agent_actions(a, sample), agent_actions(b, sample))


@dataclass
class DistanceMatrix:
    ids: list[str]
    d: list[list[float]]

    def __post_init__(self) -> None:
        n = len(self.ids)
        if len(self.d) != n or any(len(row) != n for row in self.d):
            raise InvalidMatrixError("matrix shape does not match the id list")
        for i in range(n):
            if self.d[i][i] != 0:
                raise InvalidMatrixError(f"nonzero diagonal at {i}")
            for j in range(n):
                v = self.d[i][j]
                if not math.isfinite(v) or v < 0:
                    raise InvalidMatrixError(f"entry ({i}, {j}) = {v} is not a non-negative number")
                if v != self.d[j][i]:
                    raise InvalidMatrixError(f"matrix is not symmetric at ({i}, {j})")

    def __len__(self) -> int:
        return len(self.ids)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["agent", *self.ids])
        for name, row in zip(self.ids, self.d):
            writer.writerow([name, *(_fmt(v) for v in row)])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> DistanceMatrix:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows:
            raise InvalidMatrixError("empty matrix")
        ids = rows[0][1:]
        try:
            d = [[float(v) for v in row[1:]] for row in rows[1:]]
        except ValueError as exc:
            raise InvalidMatrixError(f"bad matrix entry: {exc}") from None
        if [row[0] for row in rows[1:]] != ids:
            raise InvalidMatrixError("row labels do not match the header")
        return cls(ids, d)

    def to_dict(self) -> dict:
        return {"ids": list(self.ids), "d": [list(row) for row in self.d]}


def _fmt(v: float) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def bd_matrix(agents: Sequence[AgentHandle], sample: StateSample) -> DistanceMatrix:
    if len(agents) < 2:
        raise InvalidInputError("need at least two agents")
    for i, a in enumerate(agents):
        for b in agents[i + 1:]:
            _check_action_space(a, b)
    actions = [agent_actions(agent, sample) for agent in agents]
    n = len(agents)
    d = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            d[i][j] = d[j][i] = bd_from_actions(actions[i], actions[j]).bd
    return DistanceMatrix([a.id for a in agents], d)


# -- hierarchical clustering ------------------------------------------------------


class Merge(NamedTuple):
    a: int
    b: int
    height: float
    size: int


@dataclass
class Dendrogram:
    """Agglomerative merge history.

    Leaves are clusters ``0..n-1``; the k-th merge creates cluster ``n + k``.
    """

    ids: list[str]
    merges: list[Merge]
    linkage: str = DEFAULT_LINKAGE

    def members(self, cluster: int) -> list[int]:
        n = len(self.ids)
        if cluster < n:
            return [cluster]
        m = self.merges[cluster - n]
        return sorted(self.members(m.a) + self.members(m.b))

    def final_merge(self) -> tuple[list[int], list[int]]:
        last = self.merges[-1]
        return self.members(last.a), self.members(last.b)

    def partitions(self) -> list[list[frozenset[int]]]:
        """The cluster partition of the leaves after each merge."""
        n = len(self.ids)
        active = {i: frozenset([i]) for i in range(n)}
        out = []
        for k, m in enumerate(self.merges):
            active[n + k] = active.pop(m.a) | active.pop(m.b)
            out.append(sorted(active.values(), key=min))
        return out

    def to_dict(self) -> dict:
        return {
            "linkage": self.linkage,
            "ids": list(self.ids),
            "merges": [[m.a, m.b, m.height] for m in self.merges],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _linkage_distance(d, xs: list[int], ys: list[int], linkage: str) -> float:
    values = [d[x][y] for x in xs for y in ys]
    if linkage == "single":
        return min(values)
    if linkage == "complete":
        return max(values)
    return math.fsum(values) / len(values)


def hierarchical_cluster(matrix: DistanceMatrix, linkage: str = DEFAULT_LINKAGE) -> Dendrogram:
    """Merge the closest pair of clusters until one remains.

    Ties go to the pair with the lowest (cluster id, cluster id).
    """
    if linkage not in LINKAGES:
        raise InvalidInputError(f"unknown linkage {linkage!r}; expected one of {LINKAGES}")
    n = len(matrix)
    if n < 2:
        raise InvalidMatrixError("need at least two points to cluster")
    d = matrix.d
    active: dict[int, list[int]] = {i: [i] for i in range(n)}
    merges = []
    next_id = n
    while len(active) > 1:
        keys = sorted(active)
        best = None
        for ia, a in enumerate(keys):
            for b in keys[ia + 1:]:
                dist = _linkage_distance(d, active[a], active[b], linkage)
                if best is None or dist < best[0]:
                    best = (dist, a, b)
        dist, a, b = best
        members = active.pop(a) + active.pop(b)
        active[next_id] = members
        merges.append(Merge(a, b, dist, len(members)))
        next_id += 1
    return Dendrogram(list(matrix.ids), merges, linkage)


# -- correlation ----------------------------------------------------------------------


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    if len(xs) != len(ys):
        raise InvalidInputError(f"length mismatch: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise InvalidInputError("need at least two points")
    if not all(math.isfinite(v) for v in (*xs, *ys)):
        raise InvalidInputError("values must be finite")
    try:
        r = statistics.correlation([float(x) for x in xs], [float(y) for y in ys])
    except statistics.StatisticsError as exc:
        raise UndefinedCorrelationError(str(exc)) from None
    return max(-1.0, min(1.0, r))


class ScatterPoint(NamedTuple):
    bd: float
    adhoc: float
    a: str
    b: str


def bd_vs_adhoc(table: PairwiseTable, matrix: DistanceMatrix) -> tuple[list[ScatterPoint], float]:
    """One (bd, ad-hoc mean) point per unordered agent pair, and their correlation."""
    if list(table.agents) != list(matrix.ids):
        if sorted(table.agents) != sorted(matrix.ids):
            raise AlignmentError(f"agent ids differ: {table.agents} vs {matrix.ids}")
    points = []
    ids = matrix.ids
    for i in range(len(ids)):
        for j in range(i + 1, len(ids)):
            ti, tj = table.index(ids[i]), table.index(ids[j])
            if not table.has(ti, tj):
                raise IncompleteTableError(f"no entry for {ids[i]!r} with {ids[j]!r}")
            points.append(ScatterPoint(matrix.d[i][j], table.mean(ti, tj), ids[i], ids[j]))
    r = pearson([p.bd for p in points], [p.adhoc for p in points])
    return points, r


def scatter_csv(points: Sequence[ScatterPoint]) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["a", "b", "bd", "adhoc"])
    for p in points:
        writer.writerow([p.a, p.b, _fmt(p.bd), repr(float(p.adhoc))])
    return buf.getvalue()


# -- rule-trigger similarity ---------------------------------------------------------


class RuleSimilarity(NamedTuple):
    rule: str
    similarity: float
    states: int


def rule_trigger_similarity(
    rule: Rule, agent: AgentHandle, sample: StateSample, per_rule_cap: int = 1000
) -> float:
    return rule_similarity(rule, agent, sample, per_rule_cap).similarity


def rule_similarity(rule: Rule, agent: AgentHandle, sample: StateSample, per_rule_cap: int = 1000) -> RuleSimilarity:
    """How often ``agent`` does what ``rule`` says, over states where the rule fires.

    Only the first ``per_rule_cap`` triggering states are used.  With no
    triggering state at all the similarity is nan.
    """
    if rule.is_random:
        raise InvalidInputError(f"{rule.name} is random; only deterministic rules can be compared")
    if per_rule_cap < 1:
        raise InvalidInputError("per_rule_cap must be at least 1")
    used = matched = 0
    for state in sample.states:
        if used >= per_rule_cap:
            break
        obs = state.obs
        if not rule_triggers(rule, obs):
            continue
        used += 1
        if agent.decide(obs, observation_rng(obs)) == evaluate_rule(rule, obs):
            matched += 1
    if used < per_rule_cap:
        log.warning("%s: only %d of %d triggering states available", rule.name, used, per_rule_cap)
    return RuleSimilarity(rule.name, matched / used if used else math.nan, used)
