"""Seeded batch play: single games, pairings and round-robin tournaments."""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .agents import AgentHandle
from .cards import MAX_SCORE
from .engine import (
    GameState,
    TerminalStatus,
    action_index,
    apply_move,
    check_legal,
    hand_size_for,
    is_terminal,
    move_from_index,
    new_game,
    observe,
    score,
)
from .errors import CorruptRecordError, HanabiError, ProtocolViolation
from .rng import ALGORITHM, SplitMix64, derive_seed

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
_AGENT_STREAM = 0xA6E7


def turn_limit(num_players: int) -> int:
    return num_players * (50 + 8 + 3 + num_players)


def agent_rng(seed: int, seat: int) -> SplitMix64:
    """The rng a seat's agent uses in the game dealt from ``seed``."""
    return SplitMix64(derive_seed(seed, _AGENT_STREAM, seat))


@dataclass
class GameRecord:
    seed: int
    num_players: int
    agents: list[str]
    moves: list[tuple[int, int]]
    score: int
    terminal: str
    schema_version: int = SCHEMA_VERSION
    prng: str = ALGORITHM
    invalid: str | None = None

    def to_dict(self) -> dict:
        out = {
            "schema_version": self.schema_version,
            "prng": self.prng,
            "seed": self.seed,
            "num_players": self.num_players,
            "agents": list(self.agents),
            "moves": [{"player": p, "action_index": a} for p, a in self.moves],
            "score": self.score,
            "terminal": self.terminal,
        }
        if self.invalid is not None:
            out["invalid"] = self.invalid
        return out

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> GameRecord:
        try:
            return cls(
                seed=int(data["seed"]),
                num_players=int(data["num_players"]),
                agents=[str(a) for a in data["agents"]],
                moves=[(int(m["player"]), int(m["action_index"])) for m in data["moves"]],
                score=int(data["score"]),
                terminal=str(data["terminal"]),
                schema_version=int(data.get("schema_version", SCHEMA_VERSION)),
                prng=str(data.get("prng", ALGORITHM)),
                invalid=data.get("invalid"),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise CorruptRecordError(f"malformed game record: {exc}") from None

    @property
    def is_valid(self) -> bool:
        return self.invalid is None


def write_records(records: Iterable[GameRecord], path: str | Path) -> None:
    with open(path, "w") as fh:
        for rec in records:
            fh.write(rec.to_json() + "\n")


def read_records(path: str | Path) -> list[GameRecord]:
    records = []
    with open(path) as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                records.append(GameRecord.from_dict(json.loads(line)))
            except json.JSONDecodeError as exc:
                raise CorruptRecordError(f"{path}:{lineno}: {exc}") from None
    return records


def play_game(agents: Sequence[AgentHandle], seed: int) -> GameRecord:
    """Play one game with ``agents[i]`` in seat ``i``."""
    n = len(agents)
    state = new_game(n, seed)
    size = state.hand_size
    rngs = [agent_rng(seed, seat) for seat in range(n)]
    moves: list[tuple[int, int]] = []
    invalid = None
    limit = turn_limit(n)
    while is_terminal(state) is TerminalStatus.ONGOING:
        if len(moves) >= limit:
            raise RuntimeError(f"game {seed} exceeded {limit} turns")
        player = state.current_player
        obs = observe(state, player)
        try:
            move = agents[player].decide(obs, rngs[player])
            if move not in obs.legal_moves:
                raise ProtocolViolation(f"agent {agents[player].id!r} chose illegal move {move}")
        except ProtocolViolation as exc:
            invalid = str(exc)
            log.warning("game %d aborted: %s", seed, exc)
            break
        moves.append((player, action_index(move, n, size)))
        state, _ = apply_move(state, move)
    return GameRecord(
        seed=seed,
        num_players=n,
        agents=[a.id for a in agents],
        moves=moves,
        score=score(state),
        terminal=is_terminal(state).value,
        invalid=invalid,
    )


def replay(record: GameRecord) -> GameState:
    """Rebuild the final state of ``record`` from its seed and moves alone."""
    if record.prng != ALGORITHM:
        raise CorruptRecordError(f"game {record.seed}: unsupported prng {record.prng!r}")
    try:
        state = new_game(record.num_players, record.seed)
        size = hand_size_for(record.num_players)
        for turn, (player, index) in enumerate(record.moves):
            if player != state.current_player:
                raise CorruptRecordError(f"game {record.seed} turn {turn}: player {player} out of turn")
            move = move_from_index(index, record.num_players, size)
            check_legal(state, move)
            state, _ = apply_move(state, move)
    except CorruptRecordError:
        raise
    except HanabiError as exc:
        raise CorruptRecordError(f"game {record.seed}: {exc}") from None
    return state


def verify_record(record: GameRecord) -> bool:
    """True iff the record replays to its stored score and terminal status."""
    try:
        state = replay(record)
    except CorruptRecordError:
        return False
    if not record.is_valid:
        return score(state) == record.score
    return score(state) == record.score and is_terminal(state).value == record.terminal


# -- aggregation ----------------------------------------------------------------


@dataclass
class ScoreSummary:
    n: int
    mean: float
    std_dev: float
    histogram: list[int]
    invalid: int = 0

    @classmethod
    def from_scores(cls, scores: Sequence[int], invalid: int = 0) -> ScoreSummary:
        hist = [0] * (MAX_SCORE + 1)
        for s in scores:
            hist[s] += 1
        n = len(scores)
        if n == 0:
            return cls(0, math.nan, math.nan, hist, invalid)
        mean = sum(scores) / n
        var = sum((s - mean) ** 2 for s in scores) / n
        return cls(n, mean, math.sqrt(var), hist, invalid)

    @classmethod
    def from_records(cls, records: Iterable[GameRecord]) -> ScoreSummary:
        scores, invalid = [], 0
        for rec in records:
            if rec.is_valid:
                scores.append(rec.score)
            else:
                invalid += 1
        if invalid:
            log.warning("%d invalid game(s) excluded from summary", invalid)
        return cls.from_scores(scores, invalid)

    def to_dict(self) -> dict:
        return {
            "n": self.n,
            "mean": self.mean,
            "std_dev": self.std_dev,
            "histogram": list(self.histogram),
            "invalid": self.invalid,
        }


def seat_order(a: AgentHandle, b: AgentHandle, game_index: int, fixed_order: bool = False):
    """Seat assignment for game ``game_index`` of a pairing.

    The pair is first put in a canonical order (by agent id) so a pairing
    and its mirror play exactly the same games; even games then seat the
    canonical first agent first, odd games the other way round.
    """
    if not fixed_order and b.id < a.id:
        a, b = b, a
    if fixed_order or game_index % 2 == 0:
        return (a, b)
    return (b, a)


def _play_chunk(args) -> list[GameRecord]:
    a, b, indices, base_seed, fixed_order = args
    return [
        play_game(seat_order(a, b, i, fixed_order), base_seed + i)
        for i in indices
    ]


def _is_parallel_safe(agent: AgentHandle) -> bool:
    return getattr(agent, "kind", None) == "builtin"


def pairing_records(
    a: AgentHandle,
    b: AgentHandle,
    n_games: int,
    base_seed: int,
    *,
    fixed_order: bool = False,
    jobs: int = 1,
) -> list[GameRecord]:
    """All game records of a two-agent pairing, ordered by game index."""
    if n_games < 1:
        raise ValueError("n_games must be at least 1")
    if jobs > 1 and _is_parallel_safe(a) and _is_parallel_safe(b):
        chunk = max(1, math.ceil(n_games / (jobs * 4)))
        tasks = [
            (a, b, range(start, min(start + chunk, n_games)), base_seed, fixed_order)
            for start in range(0, n_games, chunk)
        ]
        with ProcessPoolExecutor(jobs) as pool:
            return [rec for part in pool.map(_play_chunk, tasks) for rec in part]
    return _play_chunk((a, b, range(n_games), base_seed, fixed_order))


def run_pairing(
    a: AgentHandle,
    b: AgentHandle,
    n_games: int,
    base_seed: int,
    *,
    fixed_order: bool = False,
    jobs: int = 1,
) -> ScoreSummary:
    records = pairing_records(a, b, n_games, base_seed, fixed_order=fixed_order, jobs=jobs)
    return ScoreSummary.from_records(records)


def self_play_partner(agent: AgentHandle) -> AgentHandle:
    """An independent second instance of ``agent`` for self-play."""
    clone = getattr(agent, "clone", None)
    return clone() if clone is not None else agent


@dataclass
class PairwiseTable:
    agents: list[str]
    cells: dict[tuple[int, int], ScoreSummary] = field(default_factory=dict)

    def cell(self, i: int, j: int) -> ScoreSummary:
        return self.cells[(i, j) if i <= j else (j, i)]

    def mean(self, i: int, j: int) -> float:
        return self.cell(i, j).mean

    def has(self, i: int, j: int) -> bool:
        return ((i, j) if i <= j else (j, i)) in self.cells

    def index(self, agent_id: str) -> int:
        return self.agents.index(agent_id)

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["agent", *self.agents])
        for i, name in enumerate(self.agents):
            row = [name]
            for j in range(len(self.agents)):
                if self.has(i, j):
                    c = self.cell(i, j)
                    row.append(f"{c.mean:.6f};{c.std_dev:.6f};{c.n}")
                else:
                    row.append("")
            writer.writerow(row)
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> PairwiseTable:
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or len(rows[0]) < 2:
            raise ValueError("empty table")
        agents = rows[0][1:]
        table = cls(agents)
        for i, row in enumerate(rows[1:]):
            if len(row) != len(agents) + 1 or row[0] != agents[i]:
                raise ValueError(f"table row {i + 1} does not match the header")
            for j, cell in enumerate(row[1:]):
                if j < i or not cell:
                    continue
                try:
                    mean, std, n = cell.split(";")
                    table.cells[(i, j)] = ScoreSummary(int(n), float(mean), float(std), [])
                except ValueError:
                    raise ValueError(f"bad table cell {cell!r}") from None
        return table

    def to_dict(self) -> dict:
        return {
            "agents": list(self.agents),
            "cells": [
                {"a": self.agents[i], "b": self.agents[j], **summary.to_dict()}
                for (i, j), summary in sorted(self.cells.items())
            ],
        }


def run_tournament(
    agents: Sequence[AgentHandle],
    n_games: int,
    base_seed: int,
    *,
    fixed_order: bool = False,
    jobs: int = 1,
    records_out: list[GameRecord] | None = None,
) -> PairwiseTable:
    """Every self-play and ad-hoc pairing, all dealt from the same seed range."""
    if len(agents) < 2:
        raise ValueError("a tournament needs at least two agents")
    table = PairwiseTable([a.id for a in agents])
    for i, a in enumerate(agents):
        for j in range(i, len(agents)):
            b = self_play_partner(a) if i == j else agents[j]
            recs = pairing_records(a, b, n_games, base_seed, fixed_order=fixed_order, jobs=jobs)
            if records_out is not None:
                records_out.extend(recs)
            table.cells[(i, j)] = ScoreSummary.from_records(recs)
    return table
