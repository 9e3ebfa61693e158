"""Belief over a viewer's hidden cards.

Two counting modes are supported.  ``internal`` removes only publicly
known cards (stacks and discards) from the pool; ``outer`` also removes
every card the viewer can see in other hands.  Hint masks restrict which
identities a slot may hold, and each surviving identity is weighted by
how many copies remain unaccounted for.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

from .cards import (
    ALL_IDENTITIES,
    COPIES,
    FULL_COUNTS,
    NUM_IDENTITIES,
    NUM_RANKS,
    Card,
    CardKnowledge,
    mask_bits,
)
from .engine import Observation
from .errors import NoCardError

__all__ = [
    "CardKnowledge",
    "IdentityDistribution",
    "Mode",
    "candidate_counts",
    "is_critical",
    "is_playable",
    "is_useless",
    "playability_probability",
    "remaining_counts",
    "uselessness_probability",
]


class Mode(str, Enum):
    INTERNAL = "internal"
    OUTER = "outer"


@dataclass(frozen=True)
class IdentityDistribution:
    weights: dict[Card, int]
    total: int

    def probability(self, card: Card) -> float:
        return self.weights.get(card, 0) / self.total


def _discard_counts(obs: Observation) -> list[int]:
    cached = obs.cache.get("discards")
    if cached is None:
        cached = [0] * NUM_IDENTITIES
        for card in obs.discard_pile:
            cached[card.color * NUM_RANKS + card.rank - 1] += 1
        obs.cache["discards"] = cached
    return cached


def remaining_counts(obs: Observation, mode: Mode) -> list[int]:
    """Copies of each identity not accounted for by the zones ``mode`` can use."""
    key = ("remaining", mode)
    cached = obs.cache.get(key)
    if cached is not None:
        return cached
    discards = _discard_counts(obs)
    counts = [FULL_COUNTS[i] - discards[i] for i in range(NUM_IDENTITIES)]
    for color, height in enumerate(obs.fireworks):
        for r in range(height):
            counts[color * NUM_RANKS + r] -= 1
    if mode is Mode.OUTER:
        for hand in obs.other_hands:
            for card in hand:
                counts[card.color * NUM_RANKS + card.rank - 1] -= 1
    obs.cache[key] = counts
    return counts


def useless_identities(obs: Observation) -> list[bool]:
    """Per identity: can it never score again, judging by stacks and discards only?"""
    cached = obs.cache.get("useless")
    if cached is not None:
        return cached
    discards = _discard_counts(obs)
    useless = [False] * NUM_IDENTITIES
    for color, height in enumerate(obs.fireworks):
        dead_above = 6
        for r in range(height + 1, 6):
            if discards[color * NUM_RANKS + r - 1] >= COPIES[r]:
                dead_above = r
                break
        for r in range(1, 6):
            useless[color * NUM_RANKS + r - 1] = r <= height or r > dead_above
    obs.cache["useless"] = useless
    return useless


def is_playable(card: Card, fireworks) -> bool:
    return card.rank == fireworks[card.color] + 1


def is_useless(card: Card, obs: Observation) -> bool:
    return useless_identities(obs)[card.index]


def is_critical(card: Card, obs: Observation) -> bool:
    """Still useful, and every other copy of the identity is in the discard pile."""
    if is_useless(card, obs):
        return False
    return _discard_counts(obs)[card.index] == COPIES[card.rank] - 1


def _own_knowledge(obs: Observation, slot: int) -> CardKnowledge:
    if not 0 <= slot < len(obs.own_hand_knowledge):
        raise NoCardError(f"slot {slot} is empty")
    return obs.own_hand_knowledge[slot]


def _slot_weights(knowledge: CardKnowledge, counts: list[int]) -> list[tuple[int, int]]:
    out = []
    for c in mask_bits(knowledge.color_possible):
        base = c * NUM_RANKS
        for r in mask_bits(knowledge.rank_possible):
            w = counts[base + r]
            if w > 0:
                out.append((base + r, w))
    return out


def candidate_counts(obs: Observation, slot: int, mode: Mode) -> IdentityDistribution:
    knowledge = _own_knowledge(obs, slot)
    weights = _slot_weights(knowledge, remaining_counts(obs, mode))
    return IdentityDistribution(
        {ALL_IDENTITIES[i]: w for i, w in weights}, sum(w for _, w in weights)
    )


def _slot_summaries(obs: Observation, mode: Mode) -> list[tuple[int, int, int]]:
    """(total, playable weight, useless weight) for every own slot, cached."""
    key = ("slots", mode)
    cached = obs.cache.get(key)
    if cached is not None:
        return cached
    counts = remaining_counts(obs, mode)
    useless = useless_identities(obs)
    fireworks = obs.fireworks
    out = []
    for knowledge in obs.own_hand_knowledge:
        total = playable = dead = 0
        for i, w in _slot_weights(knowledge, counts):
            total += w
            color, r = divmod(i, NUM_RANKS)
            if r == fireworks[color]:
                playable += w
            if useless[i]:
                dead += w
        out.append((total, playable, dead))
    obs.cache[key] = out
    return out


def playability_probability(obs: Observation, slot: int, mode: Mode) -> float:
    _own_knowledge(obs, slot)
    total, playable, _ = _slot_summaries(obs, mode)[slot]
    return playable / total


def uselessness_probability(obs: Observation, slot: int, mode: Mode) -> float:
    _own_knowledge(obs, slot)
    total, _, dead = _slot_summaries(obs, mode)[slot]
    return dead / total


def playabilities(obs: Observation, mode: Mode) -> list[float]:
    return [p / t for t, p, _ in _slot_summaries(obs, mode)]


def uselessnesses(obs: Observation, mode: Mode) -> list[float]:
    return [d / t for t, _, d in _slot_summaries(obs, mode)]


def surely_playable(obs: Observation, slot: int, mode: Mode) -> bool:
    total, playable, _ = _slot_summaries(obs, mode)[slot]
    return playable == total


def surely_useless(obs: Observation, slot: int, mode: Mode) -> bool:
    total, _, dead = _slot_summaries(obs, mode)[slot]
    return dead == total
