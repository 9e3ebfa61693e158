"""Deterministic Hanabi referee.

States are treated as values: :func:`apply_move` never mutates its input
and returns a fresh :class:`GameState`.  Hands keep the oldest card in
slot 0; drawn cards are appended on the right.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import NamedTuple

from .cards import (
    COLORS,
    FRESH_KNOWLEDGE,
    MAX_INFO_TOKENS,
    MAX_LIFE_TOKENS,
    MAX_SCORE,
    Card,
    CardKnowledge,
    Color,
    full_deck,
)
from .errors import (
    EncodingError,
    IllegalMoveError,
    InvalidConfigError,
    NotYourTurnError,
    TerminalStateError,
)
from .rng import ALGORITHM, SplitMix64


def hand_size_for(num_players: int) -> int:
    if not 2 <= num_players <= 5:
        raise InvalidConfigError(f"num_players must be in 2..5, got {num_players}")
    return 5 if num_players <= 3 else 4


class MoveKind(Enum):
    PLAY = "Play"
    DISCARD = "Discard"
    HINT_COLOR = "HintColor"
    HINT_RANK = "HintRank"


class Move(NamedTuple):
    """A move relative to the actor.

    Hints name their target by seating offset (1 = next player to act),
    which keeps action indices independent of who is moving.
    """

    kind: MoveKind
    slot: int = -1
    target_offset: int = 0
    color: Color | None = None
    rank: int | None = None

    @classmethod
    def play(cls, slot: int) -> Move:
        return cls(MoveKind.PLAY, slot)

    @classmethod
    def discard(cls, slot: int) -> Move:
        return cls(MoveKind.DISCARD, slot)

    @classmethod
    def hint_color(cls, target_offset: int, color: int) -> Move:
        return cls(MoveKind.HINT_COLOR, -1, target_offset, Color(color))

    @classmethod
    def hint_rank(cls, target_offset: int, rank: int) -> Move:
        return cls(MoveKind.HINT_RANK, -1, target_offset, None, rank)

    @property
    def is_hint(self) -> bool:
        return self.kind is MoveKind.HINT_COLOR or self.kind is MoveKind.HINT_RANK

    def __str__(self) -> str:
        if self.kind is MoveKind.HINT_COLOR:
            return f"HintColor(+{self.target_offset},{self.color.name})"
        if self.kind is MoveKind.HINT_RANK:
            return f"HintRank(+{self.target_offset},{self.rank})"
        return f"{self.kind.value}({self.slot})"


class Event(NamedTuple):
    """Resolved effect of a move, as the referee saw it."""

    kind: MoveKind
    card: Card | None = None
    success: bool | None = None
    touched: tuple[int, ...] = ()
    target: int | None = None
    drew: bool = False


class HistoryEntry(NamedTuple):
    player: int
    move: Move
    event: Event


class TerminalStatus(Enum):
    ONGOING = "ongoing"
    PERFECT = "perfect"
    DECK_EXHAUSTED = "deck_exhausted"
    LIVES_EXHAUSTED = "lives_exhausted"


@dataclass(frozen=True)
class GameState:
    num_players: int
    deck: tuple[Card, ...]
    hands: tuple[tuple[Card, ...], ...]
    knowledge: tuple[tuple[CardKnowledge, ...], ...]
    fireworks: tuple[int, ...] = (0, 0, 0, 0, 0)
    info_tokens: int = MAX_INFO_TOKENS
    life_tokens: int = MAX_LIFE_TOKENS
    discard_pile: tuple[Card, ...] = ()
    current_player: int = 0
    turns_remaining_after_empty: int | None = None
    history: tuple[HistoryEntry, ...] = ()
    rng_seed: int = 0
    prng: str = ALGORITHM

    @property
    def hand_size(self) -> int:
        return hand_size_for(self.num_players)

    @property
    def deck_size(self) -> int:
        return len(self.deck)


def new_game(num_players: int, seed: int) -> GameState:
    """Shuffle with SplitMix64(seed) and deal each player a full hand in seat order."""
    size = hand_size_for(num_players)
    deck = full_deck()
    SplitMix64(seed).shuffle(deck)
    hands = tuple(tuple(deck[p * size:(p + 1) * size]) for p in range(num_players))
    knowledge = tuple((FRESH_KNOWLEDGE,) * size for _ in range(num_players))
    return GameState(
        num_players=num_players,
        deck=tuple(deck[num_players * size:]),
        hands=hands,
        knowledge=knowledge,
        rng_seed=seed,
    )


def is_terminal(state: GameState) -> TerminalStatus:
    if state.life_tokens == 0:
        return TerminalStatus.LIVES_EXHAUSTED
    if sum(state.fireworks) == MAX_SCORE:
        return TerminalStatus.PERFECT
    if state.turns_remaining_after_empty == 0:
        return TerminalStatus.DECK_EXHAUSTED
    return TerminalStatus.ONGOING


def score(state: GameState) -> int:
    """Sum of stack heights, or 0 once every life token is lost."""
    if state.life_tokens == 0:
        return 0
    return sum(state.fireworks)


def legal_moves(state: GameState, player: int) -> list[Move]:
    """Legal moves for ``player``, in action-index order."""
    if is_terminal(state) is not TerminalStatus.ONGOING:
        raise TerminalStateError("game is over")
    if player != state.current_player:
        raise NotYourTurnError(f"player {player} moved on player {state.current_player}'s turn")
    return _legal_moves(state)


def _legal_moves(state: GameState) -> list[Move]:
    player = state.current_player
    slots = range(len(state.hands[player]))
    moves: list[Move] = []
    if state.info_tokens < MAX_INFO_TOKENS:
        moves.extend(Move(MoveKind.DISCARD, s) for s in slots)
    moves.extend(Move(MoveKind.PLAY, s) for s in slots)
    if state.info_tokens > 0:
        n = state.num_players
        for offset in range(1, n):
            hand = state.hands[(player + offset) % n]
            colors = {c.color for c in hand}
            ranks = {c.rank for c in hand}
            moves.extend(Move(MoveKind.HINT_COLOR, -1, offset, c) for c in COLORS if c in colors)
            moves.extend(Move(MoveKind.HINT_RANK, -1, offset, None, r) for r in range(1, 6) if r in ranks)
    return moves


def check_legal(state: GameState, move: Move) -> None:
    """Raise :class:`IllegalMoveError` naming the first rule ``move`` breaks."""
    if is_terminal(state) is not TerminalStatus.ONGOING:
        raise TerminalStateError("game is over")
    hand = state.hands[state.current_player]
    if move.kind is MoveKind.PLAY or move.kind is MoveKind.DISCARD:
        if not 0 <= move.slot < len(hand):
            raise IllegalMoveError(f"slot {move.slot} is empty", move)
        if move.kind is MoveKind.DISCARD and state.info_tokens >= MAX_INFO_TOKENS:
            raise IllegalMoveError("cannot discard with all information tokens available", move)
        return
    if state.info_tokens <= 0:
        raise IllegalMoveError("hints need an information token", move)
    if not 1 <= move.target_offset < state.num_players:
        raise IllegalMoveError("hint must target another player", move)
    target = state.hands[(state.current_player + move.target_offset) % state.num_players]
    if move.kind is MoveKind.HINT_COLOR:
        if move.color is None or not any(c.color == move.color for c in target):
            raise IllegalMoveError("color hint must touch at least one card", move)
    elif move.kind is MoveKind.HINT_RANK:
        if move.rank is None or not any(c.rank == move.rank for c in target):
            raise IllegalMoveError("rank hint must touch at least one card", move)
    else:
        raise IllegalMoveError("unknown move kind", move)


def apply_move(state: GameState, move: Move) -> tuple[GameState, Event]:
    check_legal(state, move)
    n = state.num_players
    actor = state.current_player
    hands = list(state.hands)
    knowledge = list(state.knowledge)
    fireworks = state.fireworks
    info = state.info_tokens
    lives = state.life_tokens
    discard = state.discard_pile
    deck = state.deck
    drew = False

    if move.kind is MoveKind.PLAY or move.kind is MoveKind.DISCARD:
        hand = hands[actor]
        card = hand[move.slot]
        hand = hand[: move.slot] + hand[move.slot + 1:]
        know = knowledge[actor]
        know = know[: move.slot] + know[move.slot + 1:]
        success = None
        if move.kind is MoveKind.PLAY:
            success = card.rank == fireworks[card.color] + 1
            if success:
                fw = list(fireworks)
                fw[card.color] = card.rank
                fireworks = tuple(fw)
                if card.rank == 5 and info < MAX_INFO_TOKENS:
                    info += 1
            else:
                discard = discard + (card,)
                lives -= 1
        else:
            discard = discard + (card,)
            info += 1
        if deck:
            hand = hand + (deck[0],)
            know = know + (FRESH_KNOWLEDGE,)
            deck = deck[1:]
            drew = True
        hands[actor] = hand
        knowledge[actor] = know
        event = Event(move.kind, card, success, drew=drew)
    else:
        target = (actor + move.target_offset) % n
        info -= 1
        touched = []
        new_know = []
        if move.kind is MoveKind.HINT_COLOR:
            for slot, (card, k) in enumerate(zip(hands[target], knowledge[target])):
                hit = card.color == move.color
                if hit:
                    touched.append(slot)
                new_know.append(k.after_color_hint(move.color, hit))
        else:
            for slot, (card, k) in enumerate(zip(hands[target], knowledge[target])):
                hit = card.rank == move.rank
                if hit:
                    touched.append(slot)
                new_know.append(k.after_rank_hint(move.rank, hit))
        knowledge[target] = tuple(new_know)
        event = Event(move.kind, touched=tuple(touched), target=target)

    remaining = state.turns_remaining_after_empty
    if remaining is not None:
        remaining -= 1
    elif drew and not deck:
        remaining = n

    new_state = replace(
        state,
        deck=deck,
        hands=tuple(hands),
        knowledge=tuple(knowledge),
        fireworks=fireworks,
        info_tokens=info,
        life_tokens=lives,
        discard_pile=discard,
        current_player=(actor + 1) % n,
        turns_remaining_after_empty=remaining,
        history=state.history + (HistoryEntry(actor, move, event),),
    )
    return new_state, event


# -- observations ------------------------------------------------------------


@dataclass(eq=False)
class Observation:
    """One player's view of a :class:`GameState`.

    ``other_hands[k]`` and ``other_knowledge[k]`` belong to the player at
    seating offset ``k + 1``.  The viewer's own card identities are absent.
    """

    viewer: int
    num_players: int
    hand_size: int
    own_hand_knowledge: tuple[CardKnowledge, ...]
    other_hands: tuple[tuple[Card, ...], ...]
    other_knowledge: tuple[tuple[CardKnowledge, ...], ...]
    fireworks: tuple[int, ...]
    info_tokens: int
    life_tokens: int
    discard_pile: tuple[Card, ...]
    deck_size: int
    current_player: int
    turns_remaining_after_empty: int | None
    legal_moves: tuple[Move, ...]
    cache: dict = field(default_factory=dict, repr=False)

    def hand_of(self, offset: int) -> tuple[Card, ...]:
        return self.other_hands[offset - 1]

    def knowledge_of(self, offset: int) -> tuple[CardKnowledge, ...]:
        return self.other_knowledge[offset - 1]

    @property
    def discard_allowed(self) -> bool:
        return bool(self.legal_moves) and self.info_tokens < MAX_INFO_TOKENS

    @property
    def hint_allowed(self) -> bool:
        return bool(self.legal_moves) and self.info_tokens > 0


def observe(state: GameState, viewer: int) -> Observation:
    n = state.num_players
    others = [(viewer + k) % n for k in range(1, n)]
    active = is_terminal(state) is TerminalStatus.ONGOING and viewer == state.current_player
    return Observation(
        viewer=viewer,
        num_players=n,
        hand_size=state.hand_size,
        own_hand_knowledge=state.knowledge[viewer],
        other_hands=tuple(state.hands[p] for p in others),
        other_knowledge=tuple(state.knowledge[p] for p in others),
        fireworks=state.fireworks,
        info_tokens=state.info_tokens,
        life_tokens=state.life_tokens,
        discard_pile=state.discard_pile,
        deck_size=len(state.deck),
        current_player=state.current_player,
        turns_remaining_after_empty=state.turns_remaining_after_empty,
        legal_moves=tuple(_legal_moves(state)) if active else (),
    )


# -- action encoding ---------------------------------------------------------


def action_space_size(num_players: int, hand_size: int) -> int:
    return 2 * hand_size + 10 * (num_players - 1)


def action_index(move: Move, num_players: int, hand_size: int) -> int:
    """Canonical integer for ``move``.

    Layout: discards ``[0, H)``, plays ``[H, 2H)``, then ten hint entries
    per other player in offset order (five colors R Y G B W, then ranks 1-5).
    """
    if move.kind is MoveKind.DISCARD or move.kind is MoveKind.PLAY:
        if not 0 <= move.slot < hand_size:
            raise EncodingError(f"slot out of range: {move}")
        return move.slot + (hand_size if move.kind is MoveKind.PLAY else 0)
    if not 1 <= move.target_offset < num_players:
        raise EncodingError(f"hint offset out of range: {move}")
    base = 2 * hand_size + 10 * (move.target_offset - 1)
    if move.kind is MoveKind.HINT_COLOR and move.color is not None:
        return base + int(move.color)
    if move.kind is MoveKind.HINT_RANK and move.rank is not None and 1 <= move.rank <= 5:
        return base + 4 + move.rank
    raise EncodingError(f"malformed move: {move!r}")


def move_from_index(index: int, num_players: int, hand_size: int) -> Move:
    if not 0 <= index < action_space_size(num_players, hand_size):
        raise EncodingError(f"action index {index} out of range")
    if index < hand_size:
        return Move(MoveKind.DISCARD, index)
    if index < 2 * hand_size:
        return Move(MoveKind.PLAY, index - hand_size)
    offset, rest = divmod(index - 2 * hand_size, 10)
    if rest < 5:
        return Move.hint_color(offset + 1, rest)
    return Move.hint_rank(offset + 1, rest - 4)


# -- audits ------------------------------------------------------------------


def invariant_violations(state: GameState) -> list[str]:
    """Full audit of card conservation and token bounds; empty when sound."""
    problems = []
    seen = Counter(state.deck)
    for hand in state.hands:
        seen.update(hand)
    seen.update(state.discard_pile)
    for color, height in zip(COLORS, state.fireworks):
        if not 0 <= height <= 5:
            problems.append(f"fireworks[{color.name}]={height}")
        seen.update(Card(color, r) for r in range(1, height + 1))
    if seen != Counter(full_deck()):
        problems.append("card multiset not conserved")
    if not 0 <= state.info_tokens <= MAX_INFO_TOKENS:
        problems.append(f"info_tokens={state.info_tokens}")
    if not 0 <= state.life_tokens <= MAX_LIFE_TOKENS:
        problems.append(f"life_tokens={state.life_tokens}")
    size = state.hand_size
    for p, (hand, know) in enumerate(zip(state.hands, state.knowledge)):
        if len(hand) > size or len(hand) != len(know):
            problems.append(f"player {p} hand/knowledge size mismatch")
        for card, k in zip(hand, know):
            if not k.allows(card):
                problems.append(f"player {p} knowledge excludes true card {card}")
            if not k.color_possible or not k.rank_possible:
                problems.append(f"player {p} has an empty knowledge mask")
    return problems
