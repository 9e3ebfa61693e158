"""Shared test helpers: hand-built states, random play, independent oracles."""

from __future__ import annotations

import itertools
from collections import Counter
from fractions import Fraction

from hanabi_adhoc.cards import COLORS, FRESH_KNOWLEDGE, Card, full_deck
from hanabi_adhoc.engine import GameState, apply_move, is_terminal, new_game, observe, TerminalStatus
from hanabi_adhoc.rng import SplitMix64


def cards(text: str) -> tuple[Card, ...]:
    return tuple(Card.parse(t) for t in text.split())


def build_state(
    hands,
    fireworks=(0, 0, 0, 0, 0),
    discards=(),
    knowledge=None,
    info=8,
    lives=3,
    current=0,
    deck=None,
    turns_remaining=None,
) -> GameState:
    """A state with the given public zones; the deck holds every other card unless given."""
    hands = tuple(cards(h) if isinstance(h, str) else tuple(h) for h in hands)
    discards = cards(discards) if isinstance(discards, str) else tuple(discards)
    if deck is None:
        pool = Counter(full_deck())
        for hand in hands:
            pool.subtract(hand)
        pool.subtract(discards)
        for color, height in zip(COLORS, fireworks):
            pool.subtract(Card(color, r) for r in range(1, height + 1))
        if any(v < 0 for v in pool.values()):
            raise ValueError("state uses more copies than exist")
        deck = tuple(sorted(pool.elements()))
    if knowledge is None:
        knowledge = tuple((FRESH_KNOWLEDGE,) * len(h) for h in hands)
    return GameState(
        num_players=len(hands),
        deck=tuple(deck),
        hands=hands,
        knowledge=tuple(tuple(k) for k in knowledge),
        fireworks=tuple(fireworks),
        info_tokens=info,
        life_tokens=lives,
        discard_pile=discards,
        current_player=current,
        turns_remaining_after_empty=turns_remaining,
    )


def random_playout(num_players: int, seed: int, max_turns: int | None = None):
    """Yield successive states of a game driven by uniformly random legal moves."""
    state = new_game(num_players, seed)
    rng = SplitMix64(seed ^ 0x5EED)
    yield state
    turns = 0
    while is_terminal(state) is TerminalStatus.ONGOING:
        if max_turns is not None and turns >= max_turns:
            return
        moves = observe(state, state.current_player).legal_moves
        state, _ = apply_move(state, rng.choice(moves))
        turns += 1
        yield state


def random_midgame_state(num_players: int, seed: int) -> GameState:
    """A non-terminal state some random number of turns into a random game."""
    rng = SplitMix64(seed)
    target = rng.below(60)
    last = None
    for turn, state in enumerate(random_playout(num_players, seed)):
        if is_terminal(state) is not TerminalStatus.ONGOING:
            break
        last = state
        if turn == target:
            break
    return last


# -- oracles -----------------------------------------------------------------------


def oracle_probabilities(obs, slot: int, mode: str) -> tuple[Fraction, Fraction]:
    """Playability and uselessness by enumerating every physical card copy.

    Independent of the library: builds the unseen multiset card by card and
    decides uselessness by walking each color's stack upward.
    """
    unseen = list(full_deck())
    removed = list(obs.discard_pile)
    for color, height in zip(COLORS, obs.fireworks):
        removed += [Card(color, r) for r in range(1, height + 1)]
    if mode == "outer":
        for hand in obs.other_hands:
            removed += list(hand)
    for card in removed:
        unseen.remove(card)
    k = obs.own_hand_knowledge[slot]
    candidates = [
        c for c in unseen
        if k.color_possible & (1 << c.color) and k.rank_possible & (1 << (c.rank - 1))
    ]
    discarded = Counter(obs.discard_pile)
    total_copies = Counter(full_deck())

    def useless(card: Card) -> bool:
        height = obs.fireworks[card.color]
        if card.rank <= height:
            return True
        for r in range(height + 1, card.rank):
            needed = Card(card.color, r)
            if discarded[needed] == total_copies[needed]:
                return True
        return False

    def playable(card: Card) -> bool:
        return card.rank == obs.fireworks[card.color] + 1

    n = len(candidates)
    return (
        Fraction(sum(map(playable, candidates)), n),
        Fraction(sum(map(useless, candidates)), n),
    )


def oracle_pearson(xs, ys) -> tuple[Fraction, Fraction]:
    """Exact (covariance sum, product of variance sums) for the textbook coefficient.

    r = cov / sqrt(var_product); returned unevaluated so tests can compare
    r**2 and its sign without rounding.
    """
    n = len(xs)
    xs = [Fraction(x) for x in xs]
    ys = [Fraction(y) for y in ys]
    mx, my = sum(xs) / n, sum(ys) / n
    sxy = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
    sxx = sum((x - mx) ** 2 for x in xs)
    syy = sum((y - my) ** 2 for y in ys)
    return sxy, sxx * syy


def mst_partitions(d):
    """Single-linkage structure via Kruskal on the complete graph.

    Returns ``(partitions, heights)``: for each distinct weight ``h`` used by
    the minimum spanning tree, the components of the graph of edges ``<= h``;
    and the sorted tree edge weights.
    """
    n = len(d)
    edges = sorted((d[i][j], i, j) for i, j in itertools.combinations(range(n), 2))
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    heights = []
    for w, i, j in edges:
        ri, rj = find(i), find(j)
        if ri != rj:
            parent[ri] = rj
            heights.append(w)
    out = []
    for h in sorted(set(heights)):
        comp = list(range(n))

        def root(x):
            while comp[x] != x:
                x = comp[x]
            return x

        for w, i, j in edges:
            if w <= h:
                ri, rj = root(i), root(j)
                if ri != rj:
                    comp[ri] = rj
        groups: dict[int, set[int]] = {}
        for x in range(n):
            groups.setdefault(root(x), set()).add(x)
        out.append((h, frozenset(frozenset(g) for g in groups.values())))
    return out, sorted(heights)
