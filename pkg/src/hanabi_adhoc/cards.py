"""Card identities, deck composition and per-slot hint knowledge."""

from __future__ import annotations

from enum import IntEnum
from typing import Iterator, NamedTuple

NUM_COLORS = 5
NUM_RANKS = 5
NUM_IDENTITIES = NUM_COLORS * NUM_RANKS
MAX_INFO_TOKENS = 8
MAX_LIFE_TOKENS = 3
MAX_SCORE = NUM_COLORS * NUM_RANKS

# copies per rank: three 1s, two each of 2-4, one 5
COPIES = {1: 3, 2: 2, 3: 2, 4: 2, 5: 1}
FULL_MASK = (1 << 5) - 1


class Color(IntEnum):
    R = 0
    Y = 1
    G = 2
    B = 3
    W = 4

    def __str__(self) -> str:
        return self.name


COLORS = tuple(Color)
RANKS = (1, 2, 3, 4, 5)


class Card(NamedTuple):
    color: Color
    rank: int

    @property
    def index(self) -> int:
        """Dense identity index in 0..24, color-major."""
        return self.color * NUM_RANKS + self.rank - 1

    @classmethod
    def from_index(cls, index: int) -> Card:
        return ALL_IDENTITIES[index]

    @classmethod
    def parse(cls, text: str) -> Card:
        """Parse the two-character form used in logs, e.g. ``"R1"``."""
        if len(text) != 2 or text[0] not in Color.__members__ or text[1] not in "12345":
            raise ValueError(f"not a card: {text!r}")
        return cls(Color[text[0]], int(text[1]))

    def __str__(self) -> str:
        return f"{self.color.name}{self.rank}"


ALL_IDENTITIES: tuple[Card, ...] = tuple(Card(c, r) for c in COLORS for r in RANKS)
FULL_COUNTS: tuple[int, ...] = tuple(COPIES[card.rank] for card in ALL_IDENTITIES)


def full_deck() -> list[Card]:
    """The 50-card multiset in canonical (unshuffled) order."""
    return [card for card in ALL_IDENTITIES for _ in range(COPIES[card.rank])]


def mask_bits(mask: int) -> Iterator[int]:
    i = 0
    while mask:
        if mask & 1:
            yield i
        mask >>= 1
        i += 1


class CardKnowledge(NamedTuple):
    """What a player has been told about one of their own slots.

    Bit ``c`` of ``color_possible`` is set while color ``c`` is still
    possible; bit ``r - 1`` of ``rank_possible`` likewise for rank ``r``.
    The ``*_hinted`` flags record a positive hint on that attribute.
    """

    color_possible: int = FULL_MASK
    rank_possible: int = FULL_MASK
    color_hinted: bool = False
    rank_hinted: bool = False

    def after_color_hint(self, color: int, touched: bool) -> CardKnowledge:
        bit = 1 << color
        if touched:
            return self._replace(color_possible=bit, color_hinted=True)
        return self._replace(color_possible=self.color_possible & ~bit)

    def after_rank_hint(self, rank: int, touched: bool) -> CardKnowledge:
        bit = 1 << (rank - 1)
        if touched:
            return self._replace(rank_possible=bit, rank_hinted=True)
        return self._replace(rank_possible=self.rank_possible & ~bit)

    def allows(self, card: Card) -> bool:
        return bool(self.color_possible >> card.color & 1 and self.rank_possible >> (card.rank - 1) & 1)

    def possible_identities(self) -> list[Card]:
        return [
            ALL_IDENTITIES[c * NUM_RANKS + r]
            for c in mask_bits(self.color_possible)
            for r in mask_bits(self.rank_possible)
        ]

    @property
    def known_color(self) -> Color | None:
        m = self.color_possible
        return Color(m.bit_length() - 1) if m and m & (m - 1) == 0 else None

    @property
    def known_rank(self) -> int | None:
        m = self.rank_possible
        return m.bit_length() if m and m & (m - 1) == 0 else None

    @property
    def fully_known(self) -> bool:
        c, r = self.color_possible, self.rank_possible
        return c & (c - 1) == 0 and r & (r - 1) == 0

    @property
    def num_possible(self) -> int:
        return bin(self.color_possible).count("1") * bin(self.rank_possible).count("1")


FRESH_KNOWLEDGE = CardKnowledge()
