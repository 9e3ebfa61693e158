"""Agent composition and the six shipped rule-based agents.

A builtin agent is an ordered list of rules: the first rule that fires
decides the move.  When none fires, a fallback list that always produces
a legal move takes over.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Protocol, Sequence

from .engine import Move, Observation
from .errors import AgentConfigError
from .knowledge import Mode
from .rng import SplitMix64
from .rules import Rule, RuleKind, evaluate_rule, parse_rule

# first-match orderings; the rule sets are fixed, the order is configuration
BUILTIN_ORDERINGS: dict[str, tuple[Mode, tuple[str, ...]]] = {
    "internal": (Mode.INTERNAL, (
        "PlaySafeCard", "OsawaDiscard", "TellPlayableCard", "TellRandomly", "DiscardRandomly",
    )),
    "outer": (Mode.OUTER, (
        "PlaySafeCard", "OsawaDiscard", "TellPlayableCardOuter", "TellUnknown", "DiscardRandomly",
    )),
    "iggi": (Mode.OUTER, (
        "PlayIfCertain", "PlaySafeCard", "TellAnyoneAboutUsefulCard", "OsawaDiscard",
        "DiscardOldestFirst",
    )),
    "piers": (Mode.OUTER, (
        "HailMary", "PlaySafeCard", "PlayProbablySafeCard(0.6)", "TellDispensable",
        "OsawaDiscard", "DiscardOldestFirst", "TellRandomly", "DiscardRandomly",
    )),
    "flawed": (Mode.OUTER, (
        "PlaySafeCard", "PlayProbablySafeCard(0.25)", "TellRandomly", "OsawaDiscard",
        "DiscardOldestFirst", "DiscardRandomly",
    )),
    "vdb": (Mode.OUTER, (
        "PlayProbablySafeCard(0.6)", "DiscardProbablyUselessCard(0.99)",
        "TellAnyoneAboutUsefulCard", "TellAnyoneAboutUselessCard",
        "DiscardProbablyUselessCard(0.0)", "TellMostInformation",
    )),
}

DISPLAY_NAMES = {
    "internal": "Internal",
    "outer": "Outer",
    "iggi": "IGGI",
    "piers": "Piers",
    "flawed": "Flawed",
    "vdb": "VDB",
}

FALLBACK = ("DiscardRandomly", "TellRandomly", "PlayOldestFirst")


@dataclass(frozen=True)
class AgentSpec:
    name: str
    rules: tuple[Rule, ...]
    mode: Mode = Mode.OUTER
    fallback: tuple[Rule, ...] = ()

    def __post_init__(self) -> None:
        if not self.rules:
            raise AgentConfigError(f"agent {self.name!r} has no rules")
        if not self.fallback:
            fallback = tuple(parse_rule(r, self.mode) for r in FALLBACK)
            object.__setattr__(self, "fallback", fallback)

    @property
    def rule_names(self) -> list[str]:
        return [r.name for r in self.rules]

    @classmethod
    def from_names(cls, name: str, rules: Iterable[str], mode: Mode | str = Mode.OUTER) -> AgentSpec:
        mode = Mode(mode)
        try:
            parsed = tuple(parse_rule(r, mode) for r in rules)
        except ValueError as exc:
            raise AgentConfigError(f"agent {name!r}: {exc}") from None
        return cls(name, parsed, mode)


class AgentHandle(Protocol):
    id: str

    def decide(self, obs: Observation, rng: SplitMix64) -> Move: ...


@dataclass
class RuleAgent:
    """A builtin agent: pure function of the observation and its rng."""

    spec: AgentSpec
    id: str = ""
    kind = "builtin"

    def __post_init__(self) -> None:
        if not self.id:
            self.id = self.spec.name

    def decide(self, obs: Observation, rng: SplitMix64) -> Move:
        for rule in self.spec.rules:
            move = evaluate_rule(rule, obs, rng)
            if move is not None:
                return move
        for rule in self.spec.fallback:
            move = evaluate_rule(rule, obs, rng)
            if move is not None:
                return move
        raise AgentConfigError(f"agent {self.id!r} produced no move")

    def fired_rule(self, obs: Observation, rng: SplitMix64) -> tuple[Rule, Move]:
        """Like :meth:`decide` but also reports which rule produced the move."""
        for rule in self.spec.rules + self.spec.fallback:
            move = evaluate_rule(rule, obs, rng)
            if move is not None:
                return rule, move
        raise AgentConfigError(f"agent {self.id!r} produced no move")

    def clone(self) -> RuleAgent:
        return RuleAgent(self.spec, self.id)

    def close(self) -> None:
        pass


def decide(agent: AgentHandle, obs: Observation, rng: SplitMix64) -> Move:
    return agent.decide(obs, rng)


def builtin_spec(name: str) -> AgentSpec:
    key = name.lower()
    if key not in BUILTIN_ORDERINGS:
        raise AgentConfigError(f"unknown agent: {name!r}")
    mode, rules = BUILTIN_ORDERINGS[key]
    return AgentSpec.from_names(key, rules, mode)


def builtin_agent(name: str) -> RuleAgent:
    return RuleAgent(builtin_spec(name))


ENDPOINT_ENV_PREFIX = "HANABI_ADHOC_AGENT_"


def _resolve_one(entry, timeout: float) -> AgentHandle:
    from .protocol import connect_external

    if isinstance(entry, dict):
        name = entry.get("name")
        if not name:
            raise AgentConfigError(f"agent entry without a name: {entry!r}")
        if "endpoint" in entry:
            return connect_external(name, entry["endpoint"], timeout=entry.get("timeout", timeout))
        if "rules" in entry:
            return RuleAgent(AgentSpec.from_names(name, entry["rules"], entry.get("mode", "outer")))
        entry = name
    if not isinstance(entry, str) or not entry.strip():
        raise AgentConfigError(f"bad agent entry: {entry!r}")
    text = entry.strip()
    name, sep, endpoint = text.partition("=")
    override = os.environ.get(ENDPOINT_ENV_PREFIX + name.upper().replace("-", "_"))
    if override:
        return connect_external(name, override, timeout=timeout)
    if sep:
        return connect_external(name, endpoint, timeout=timeout)
    return builtin_agent(name)


def load_agents(source: str | Path | Sequence, timeout: float = 10.0) -> list[AgentHandle]:
    """Resolve agent handles from a config source.

    ``source`` may be a comma-separated string of names (``"iggi,piers"``),
    a path to a JSON file holding a list of entries, or such a list.  An
    entry is a builtin name, ``name=endpoint`` for an external agent, or a
    dict with ``name`` plus either ``rules`` (and optional ``mode``) or
    ``endpoint``.  The environment variable ``HANABI_ADHOC_AGENT_<NAME>``
    points a name at an external endpoint, overriding everything else.
    """
    if isinstance(source, Path) or (isinstance(source, str) and source.endswith(".json")):
        path = Path(source)
        try:
            entries = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise AgentConfigError(f"cannot read agent config {path}: {exc}") from None
        if isinstance(entries, dict):
            entries = entries.get("agents", [])
    elif isinstance(source, str):
        entries = [part for part in source.split(",") if part.strip()]
    else:
        entries = list(source)
    if not entries:
        raise AgentConfigError("no agents configured")
    return [_resolve_one(e, timeout) for e in entries]


__all__ = [
    "BUILTIN_ORDERINGS",
    "DISPLAY_NAMES",
    "FALLBACK",
    "AgentHandle",
    "AgentSpec",
    "RuleAgent",
    "RuleKind",
    "builtin_agent",
    "builtin_spec",
    "decide",
    "load_agents",
]
