"""Rule primitives: each maps an observation to a move or to nothing.

Ties are broken by a single total order so that every deterministic rule
is a pure function of the observation: lowest own slot first; for hints
about a particular card, lowest target slot, then lowest seating offset,
then color before rank, then ascending color/rank value.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Callable, NamedTuple

from .cards import Card, CardKnowledge
from .engine import Move, MoveKind, Observation
from .knowledge import (
    Mode,
    is_critical,
    is_playable,
    playabilities,
    surely_playable,
    surely_useless,
    useless_identities,
    uselessnesses,
)
from .rng import SplitMix64


class RuleKind(Enum):
    PLAY_SAFE_CARD = "PlaySafeCard"
    OSAWA_DISCARD = "OsawaDiscard"
    TELL_PLAYABLE_CARD = "TellPlayableCard"
    TELL_DISPENSABLE = "TellDispensable"
    PLAY_PROBABLY_SAFE_CARD = "PlayProbablySafeCard"
    DISCARD_OLDEST_FIRST = "DiscardOldestFirst"
    TELL_PLAYABLE_CARD_OUTER = "TellPlayableCardOuter"
    TELL_UNKNOWN = "TellUnknown"
    PLAY_IF_CERTAIN = "PlayIfCertain"
    HAIL_MARY = "HailMary"
    TELL_ANYONE_ABOUT_USEFUL_CARD = "TellAnyoneAboutUsefulCard"
    TELL_ANYONE_ABOUT_USELESS_CARD = "TellAnyoneAboutUselessCard"
    DISCARD_PROBABLY_USELESS_CARD = "DiscardProbablyUselessCard"
    TELL_MOST_INFORMATION = "TellMostInformation"
    TELL_RANDOMLY = "TellRandomly"
    DISCARD_RANDOMLY = "DiscardRandomly"
    # fallback-only: the last resort that makes every agent total
    PLAY_OLDEST_FIRST = "PlayOldestFirst"


THRESHOLDED = frozenset({RuleKind.PLAY_PROBABLY_SAFE_CARD, RuleKind.DISCARD_PROBABLY_USELESS_CARD})
RANDOM_KINDS = frozenset({RuleKind.TELL_RANDOMLY, RuleKind.DISCARD_RANDOMLY})

_RULE_RE = re.compile(r"^\s*([A-Za-z]+)\s*(?:\(\s*([0-9]*\.?[0-9]+(?:[eE][-+]?[0-9]+)?)\s*\))?\s*$")


@dataclass(frozen=True)
class Rule:
    kind: RuleKind
    threshold: float | None = None
    mode: Mode = Mode.OUTER

    def __post_init__(self) -> None:
        if (self.threshold is not None) != (self.kind in THRESHOLDED):
            raise ValueError(f"{self.kind.value} threshold mismatch: {self.threshold!r}")
        if self.threshold is not None and not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold out of [0, 1]: {self.threshold}")

    @property
    def name(self) -> str:
        """Stable identifier, e.g. ``PlayProbablySafeCard(0.6)``."""
        if self.threshold is None:
            return self.kind.value
        return f"{self.kind.value}({float(self.threshold)})"

    @property
    def is_random(self) -> bool:
        return self.kind in RANDOM_KINDS

    def with_mode(self, mode: Mode) -> Rule:
        return Rule(self.kind, self.threshold, mode)

    def __str__(self) -> str:
        return self.name


def parse_rule(text: str, mode: Mode = Mode.OUTER) -> Rule:
    m = _RULE_RE.match(text)
    if not m:
        raise ValueError(f"malformed rule: {text!r}")
    try:
        kind = RuleKind(m.group(1))
    except ValueError:
        raise ValueError(f"unknown rule: {m.group(1)!r}") from None
    threshold = float(m.group(2)) if m.group(2) is not None else None
    return Rule(kind, threshold, Mode(mode))


# -- hint bookkeeping ----------------------------------------------------------


class HintEffect(NamedTuple):
    move: Move
    touched: frozenset[int]
    changed: frozenset[int]
    after: tuple[CardKnowledge, ...]


def hint_effects(obs: Observation) -> list[HintEffect]:
    """What every legal hint would do to its target's knowledge, in action order."""
    cached = obs.cache.get("hints")
    if cached is not None:
        return cached
    out = []
    for move in obs.legal_moves:
        if move.kind is MoveKind.HINT_COLOR:
            hand = obs.hand_of(move.target_offset)
            hits = [card.color == move.color for card in hand]
            after = tuple(
                k.after_color_hint(move.color, hit) for k, hit in zip(obs.knowledge_of(move.target_offset), hits)
            )
        elif move.kind is MoveKind.HINT_RANK:
            hand = obs.hand_of(move.target_offset)
            hits = [card.rank == move.rank for card in hand]
            after = tuple(
                k.after_rank_hint(move.rank, hit) for k, hit in zip(obs.knowledge_of(move.target_offset), hits)
            )
        else:
            continue
        before = obs.knowledge_of(move.target_offset)
        out.append(HintEffect(
            move,
            frozenset(i for i, hit in enumerate(hits) if hit),
            frozenset(i for i, (a, b) in enumerate(zip(before, after)) if a != b),
            after,
        ))
    obs.cache["hints"] = out
    return out


def _tell_about(
    obs: Observation,
    wanted: Callable[[Card, CardKnowledge], bool],
    require_new: bool = True,
) -> Move | None:
    effects = hint_effects(obs)
    if not effects:
        return None
    targets = []
    for offset in range(1, obs.num_players):
        for slot, (card, k) in enumerate(zip(obs.hand_of(offset), obs.knowledge_of(offset))):
            if wanted(card, k):
                targets.append((slot, offset))
    targets.sort()
    for slot, offset in targets:
        best = None
        best_left = None
        for eff in effects:
            if eff.move.target_offset != offset or slot not in eff.touched:
                continue
            if require_new and slot not in eff.changed:
                continue
            left = eff.after[slot].num_possible
            if best is None or left < best_left:
                best, best_left = eff.move, left
        if best is not None:
            return best
    return None


def _all_possible(k: CardKnowledge, test: Callable[[Card], bool]) -> bool:
    return all(test(card) for card in k.possible_identities())


def _argmax(values: list[float]) -> int:
    best = 0
    for i in range(1, len(values)):
        if values[i] > values[best]:
            best = i
    return best


# -- the primitives --------------------------------------------------------------


def _play_safe_card(rule, obs, rng):
    for slot in range(len(obs.own_hand_knowledge)):
        if surely_playable(obs, slot, rule.mode):
            return Move.play(slot)
    return None


def _osawa_discard(rule, obs, rng):
    if not obs.discard_allowed:
        return None
    for slot in range(len(obs.own_hand_knowledge)):
        if surely_useless(obs, slot, rule.mode):
            return Move.discard(slot)
    return None


def _tell_playable_card(rule, obs, rng):
    fw = obs.fireworks
    return _tell_about(obs, lambda card, k: is_playable(card, fw), require_new=False)


def _tell_playable_card_outer(rule, obs, rng):
    fw = obs.fireworks
    return _tell_about(obs, lambda card, k: is_playable(card, fw))


def _tell_unknown(rule, obs, rng):
    return _tell_about(obs, lambda card, k: True)


def _tell_dispensable(rule, obs, rng):
    # a card that must not be thrown away: the holder cannot yet tell it is
    # playable, or it is the last live copy and not fully identified
    fw = obs.fireworks
    playable = lambda c: is_playable(c, fw)  # noqa: E731

    def keep(card, k):
        if playable(card) and not _all_possible(k, playable):
            return True
        return not k.fully_known and is_critical(card, obs)

    return _tell_about(obs, keep)


def _tell_useful(rule, obs, rng):
    fw = obs.fireworks
    playable = lambda c: is_playable(c, fw)  # noqa: E731
    return _tell_about(obs, lambda card, k: playable(card) and not _all_possible(k, playable))


def _tell_useless(rule, obs, rng):
    useless = useless_identities(obs)
    dead = lambda c: useless[c.index]  # noqa: E731
    return _tell_about(obs, lambda card, k: dead(card) and not _all_possible(k, dead))


def _play_probably_safe(rule, obs, rng):
    probs = playabilities(obs, rule.mode)
    if not probs:
        return None
    best = _argmax(probs)
    if probs[best] < rule.threshold:
        return None
    # never gamble the last life on a card that is not certain
    if obs.life_tokens <= 1 and probs[best] < 1.0:
        return None
    return Move.play(best)


def _hail_mary(rule, obs, rng):
    if obs.deck_size > 0 or obs.life_tokens <= 1:
        return None
    probs = playabilities(obs, rule.mode)
    return Move.play(_argmax(probs)) if probs else None


def _discard_probably_useless(rule, obs, rng):
    if not obs.discard_allowed:
        return None
    probs = uselessnesses(obs, rule.mode)
    if not probs:
        return None
    best = _argmax(probs)
    return Move.discard(best) if probs[best] >= rule.threshold else None


def _play_if_certain(rule, obs, rng):
    fw = obs.fireworks
    for slot, k in enumerate(obs.own_hand_knowledge):
        if k.fully_known and k.known_rank == fw[k.known_color] + 1:
            return Move.play(slot)
    return None


def _discard_oldest_first(rule, obs, rng):
    if obs.discard_allowed and obs.own_hand_knowledge:
        return Move.discard(0)
    return None


def _tell_most_information(rule, obs, rng):
    best = None
    most = 0
    for eff in hint_effects(obs):
        if len(eff.changed) > most:
            best, most = eff.move, len(eff.changed)
    return best


def _random_candidates(rule: Rule, obs: Observation) -> list[Move]:
    if rule.kind is RuleKind.TELL_RANDOMLY:
        return [m for m in obs.legal_moves if m.is_hint]
    return [m for m in obs.legal_moves if m.kind is MoveKind.DISCARD]


def _play_oldest_first(rule, obs, rng):
    return Move.play(0) if obs.own_hand_knowledge and obs.legal_moves else None


_DISPATCH = {
    RuleKind.PLAY_SAFE_CARD: _play_safe_card,
    RuleKind.OSAWA_DISCARD: _osawa_discard,
    RuleKind.TELL_PLAYABLE_CARD: _tell_playable_card,
    RuleKind.TELL_DISPENSABLE: _tell_dispensable,
    RuleKind.PLAY_PROBABLY_SAFE_CARD: _play_probably_safe,
    RuleKind.DISCARD_OLDEST_FIRST: _discard_oldest_first,
    RuleKind.TELL_PLAYABLE_CARD_OUTER: _tell_playable_card_outer,
    RuleKind.TELL_UNKNOWN: _tell_unknown,
    RuleKind.PLAY_IF_CERTAIN: _play_if_certain,
    RuleKind.HAIL_MARY: _hail_mary,
    RuleKind.TELL_ANYONE_ABOUT_USEFUL_CARD: _tell_useful,
    RuleKind.TELL_ANYONE_ABOUT_USELESS_CARD: _tell_useless,
    RuleKind.DISCARD_PROBABLY_USELESS_CARD: _discard_probably_useless,
    RuleKind.TELL_MOST_INFORMATION: _tell_most_information,
    RuleKind.PLAY_OLDEST_FIRST: _play_oldest_first,
}


def evaluate_rule(rule: Rule, obs: Observation, rng: SplitMix64 | None = None) -> Move | None:
    """The move ``rule`` proposes for ``obs``, or None when it does not fire.

    Random rules need ``rng``; deterministic ones ignore it.
    """
    if not obs.legal_moves:
        return None
    if rule.kind in RANDOM_KINDS:
        candidates = _random_candidates(rule, obs)
        if not candidates:
            return None
        if rng is None:
            raise ValueError(f"{rule.name} needs an rng")
        return rng.choice(candidates)
    return _DISPATCH[rule.kind](rule, obs, rng)


def rule_triggers(rule: Rule, obs: Observation) -> bool:
    if rule.kind in RANDOM_KINDS:
        return bool(obs.legal_moves) and bool(_random_candidates(rule, obs))
    return evaluate_rule(rule, obs) is not None


__all__ = [
    "RANDOM_KINDS",
    "THRESHOLDED",
    "HintEffect",
    "Rule",
    "RuleKind",
    "evaluate_rule",
    "hint_effects",
    "parse_rule",
    "rule_triggers",
]
