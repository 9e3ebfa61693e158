from collections import Counter

import pytest
from hypothesis import given, settings, strategies as st

from hanabi_adhoc.cards import COPIES, FRESH_KNOWLEDGE, Card, Color, CardKnowledge, full_deck
from hanabi_adhoc.engine import (
    Move,
    MoveKind,
    TerminalStatus,
    action_index,
    action_space_size,
    apply_move,
    check_legal,
    invariant_violations,
    is_terminal,
    legal_moves,
    move_from_index,
    new_game,
    observe,
    score,
)
from hanabi_adhoc.errors import (
    EncodingError,
    IllegalMoveError,
    InvalidConfigError,
    NotYourTurnError,
    TerminalStateError,
)
from hanabi_adhoc.rng import SplitMix64

from tests.helpers import build_state, cards, random_playout


def test_deck_composition():
    deck = full_deck()
    assert len(deck) == 50
    counts = Counter(deck)
    assert len(counts) == 25
    for card, n in counts.items():
        assert n == COPIES[card.rank]
    assert sum(1 for c in deck if c.color == Color.G) == 10


@pytest.mark.parametrize("players,hand,deck", [(2, 5, 40), (3, 5, 35), (4, 4, 34), (5, 4, 30)])
def test_new_game_deal(players, hand, deck):
    state = new_game(players, 11)
    assert all(len(h) == hand for h in state.hands)
    assert state.deck_size == deck
    assert state.info_tokens == 8 and state.life_tokens == 3
    assert state.fireworks == (0,) * 5 and state.current_player == 0
    assert invariant_violations(state) == []


def test_new_game_is_seeded():
    assert new_game(2, 99) == new_game(2, 99)
    assert new_game(2, 99).deck != new_game(2, 100).deck


def test_deal_follows_shuffled_order():
    deck = full_deck()
    SplitMix64(5).shuffle(deck)
    state = new_game(3, 5)
    assert state.hands == (tuple(deck[0:5]), tuple(deck[5:10]), tuple(deck[10:15]))
    assert state.deck == tuple(deck[15:])


@pytest.mark.parametrize("players", [0, 1, 6])
def test_new_game_rejects_player_count(players):
    with pytest.raises(InvalidConfigError):
        new_game(players, 0)


def test_initial_legal_moves_have_no_discards():
    moves = legal_moves(new_game(2, 3), 0)
    assert not any(m.kind is MoveKind.DISCARD for m in moves)
    assert sum(m.kind is MoveKind.PLAY for m in moves) == 5


def test_no_hints_without_tokens():
    state = build_state(["R1 R2 R3 R4 R5", "G1 G2 G3 G4 G5"], info=0)
    moves = legal_moves(state, 0)
    assert not any(m.is_hint for m in moves)
    assert sum(m.kind is MoveKind.DISCARD for m in moves) == 5


def test_color_hints_match_target_hand():
    state = build_state(["Y1 Y2 Y3 B1 B2", "R1 R3 G4 W1 W2"])
    colors = {m.color for m in legal_moves(state, 0) if m.kind is MoveKind.HINT_COLOR}
    assert colors == {Color.R, Color.G, Color.W}
    ranks = {m.rank for m in legal_moves(state, 0) if m.kind is MoveKind.HINT_RANK}
    assert ranks == {1, 2, 3, 4}


def test_legal_moves_errors():
    state = new_game(2, 1)
    with pytest.raises(NotYourTurnError):
        legal_moves(state, 1)
    dead = build_state(["R1 R2 R3 R4 R5", "G1 G2 G3 G4 G5"], lives=0)
    with pytest.raises(TerminalStateError):
        legal_moves(dead, 0)


def test_successful_play():
    state = build_state(["R1 G2 G3 B4 B5", "Y1 Y2 Y3 Y4 W1"])
    after, event = apply_move(state, Move.play(0))
    assert after.fireworks[Color.R] == 1
    assert after.life_tokens == 3 and event.success
    # slot 0 removed, the rest shift left, the top of the deck arrives on the right
    assert after.hands[0] == state.hands[0][1:] + (state.deck[0],)
    assert after.current_player == 1


def test_failed_play_costs_a_life():
    state = build_state(["R3 G2 G3 B4 B5", "Y1 Y2 Y3 Y4 W1"])
    after, event = apply_move(state, Move.play(0))
    assert after.life_tokens == 2
    assert after.discard_pile == (Card(Color.R, 3),)
    assert after.fireworks == (0,) * 5 and event.success is False


def test_completing_a_stack_refunds_a_token():
    state = build_state(["R5 G2 G3 B4 B1", "Y1 Y2 Y3 Y4 W1"], fireworks=(4, 0, 0, 0, 0), info=5)
    after, _ = apply_move(state, Move.play(0))
    assert after.fireworks[0] == 5 and after.info_tokens == 6
    full = build_state(["R5 G2 G3 B4 B1", "Y1 Y2 Y3 Y4 W1"], fireworks=(4, 0, 0, 0, 0), info=8)
    assert apply_move(full, Move.play(0))[0].info_tokens == 8


def test_discard_gains_a_token():
    state = build_state(["R5 G2 G3 B4 B1", "Y1 Y2 Y3 Y4 W1"], info=3)
    after, _ = apply_move(state, Move.discard(2))
    assert after.info_tokens == 4 and after.discard_pile == (Card(Color.G, 3),)


def test_rank_hint_marks_positive_and_negative():
    state = build_state(["R5 G2 G3 B4 B1", "Y1 W1 Y3 Y4 G2"])
    after, event = apply_move(state, Move.hint_rank(1, 1))
    assert event.touched == (0, 1) and event.target == 1
    know = after.knowledge[1]
    for slot in (0, 1):
        assert know[slot].rank_possible == 0b00001 and know[slot].rank_hinted
    for slot in (2, 3, 4):
        assert know[slot].rank_possible == 0b11110 and not know[slot].rank_hinted
    assert after.info_tokens == 7


def test_color_hint_updates_masks():
    state = build_state(["R5 G2 G3 B4 B1", "Y1 W1 Y3 Y4 G2"])
    after, _ = apply_move(state, Move.hint_color(1, Color.Y))
    know = after.knowledge[1]
    assert [k.color_hinted for k in know] == [True, False, True, True, False]
    assert know[1].color_possible == 0b11101


def test_illegal_moves_name_the_rule():
    state = build_state(["R5 G2 G3 B4 B1", "Y1 W1 Y3 Y4 G2"])
    with pytest.raises(IllegalMoveError, match="information tokens"):
        apply_move(state, Move.discard(0))
    with pytest.raises(IllegalMoveError, match="touch"):
        apply_move(state, Move.hint_color(1, Color.B))
    with pytest.raises(IllegalMoveError, match="another player"):
        check_legal(state, Move.hint_rank(0, 5))
    with pytest.raises(IllegalMoveError, match="empty"):
        check_legal(state, Move.play(7))
    no_tokens = build_state(["R5 G2 G3 B4 B1", "Y1 W1 Y3 Y4 G2"], info=0)
    with pytest.raises(IllegalMoveError, match="token"):
        check_legal(no_tokens, Move.hint_rank(1, 1))


def test_last_round_gives_everyone_one_turn():
    state = build_state(
        ["R1 R2 R3 R4 R5", "G1 G2 G3 G4 G5", "B1 B2 B3 B4 B5"], deck=cards("W1"), info=4
    )
    state, _ = apply_move(state, Move.discard(0))
    assert state.deck_size == 0 and state.turns_remaining_after_empty == 3
    for expected in (2, 1, 0):
        assert is_terminal(state) is TerminalStatus.ONGOING
        state, _ = apply_move(state, Move.discard(0))
        assert state.turns_remaining_after_empty == expected
    assert is_terminal(state) is TerminalStatus.DECK_EXHAUSTED
    # the drawer of the last card moved once more: four moves after the draw, three players
    assert len(state.history) == 4


def test_terminal_and_score():
    perfect = build_state(["", ""], fireworks=(5,) * 5, deck=())
    assert is_terminal(perfect) is TerminalStatus.PERFECT and score(perfect) == 25
    one_life = build_state(["", ""], fireworks=(5,) * 5, deck=(), lives=1)
    assert score(one_life) == 25
    bombed = build_state(["R1 R2 R3 R4 R5", "G1 G2 G3 G4 G5"], fireworks=(0, 0, 0, 0, 0), lives=0)
    assert is_terminal(bombed) is TerminalStatus.LIVES_EXHAUSTED and score(bombed) == 0
    mid = build_state(["R4 R5 Y1 Y2 Y3", "G2 G3 G4 G5 B1"], fireworks=(3, 0, 1, 0, 0))
    assert score(mid) == 4 and is_terminal(mid) is TerminalStatus.ONGOING
    assert is_terminal(new_game(2, 0)) is TerminalStatus.ONGOING


def test_observation_hides_own_cards():
    state = new_game(3, 8)
    obs = observe(state, 1)
    assert obs.other_hands == (state.hands[2], state.hands[0])
    assert not hasattr(obs, "hands")
    assert all(isinstance(k, CardKnowledge) for k in obs.own_hand_knowledge)
    assert obs.legal_moves == ()
    assert observe(state, 0).legal_moves == tuple(legal_moves(state, 0))


@pytest.mark.parametrize(
    "move,players,size,index",
    [
        (Move.play(0), 2, 5, 5),
        (Move.discard(4), 2, 5, 4),
        (Move.hint_color(1, Color.R), 2, 5, 10),
        (Move.hint_rank(1, 5), 2, 5, 19),
        (Move.hint_color(2, Color.W), 3, 5, 24),
        (Move.hint_rank(3, 1), 4, 4, 33),
    ],
)
def test_action_index_layout(move, players, size, index):
    assert action_index(move, players, size) == index
    assert move_from_index(index, players, size) == move


def test_action_space_sizes():
    assert action_space_size(2, 5) == 20
    assert action_space_size(3, 5) == 30
    assert action_space_size(5, 4) == 48


def test_action_index_rejects_malformed():
    with pytest.raises(EncodingError):
        action_index(Move.play(5), 2, 5)
    with pytest.raises(EncodingError):
        action_index(Move.hint_rank(2, 1), 2, 5)
    with pytest.raises(EncodingError):
        move_from_index(20, 2, 5)


@given(st.sampled_from([(2, 5), (3, 5), (4, 4), (5, 4)]), st.data())
def test_action_index_bijection(shape, data):
    players, size = shape
    index = data.draw(st.integers(0, action_space_size(players, size) - 1))
    assert action_index(move_from_index(index, players, size), players, size) == index


@settings(max_examples=40, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**64 - 1))
def test_random_games_stay_sound(players, seed):
    turns = 0
    for state in random_playout(players, seed):
        assert invariant_violations(state) == []
        turns += 1
    assert turns - 1 <= players * (50 + 8 + 3 + players)
    assert is_terminal(state) is not TerminalStatus.ONGOING


@settings(max_examples=30, deadline=None)
@given(st.integers(2, 5), st.integers(0, 2**32))
def test_info_tokens_rise_only_by_discard_or_five(players, seed):
    prev = None
    for state in random_playout(players, seed):
        if prev is not None and state.info_tokens > prev.info_tokens:
            entry = state.history[-1]
            assert entry.move.kind is MoveKind.DISCARD or (
                entry.event.success and entry.event.card.rank == 5
            )
        prev = state


def test_apply_move_does_not_mutate():
    state = new_game(2, 4)
    snapshot = (state.hands, state.deck, state.knowledge, state.info_tokens)
    apply_move(state, Move.play(0))
    assert (state.hands, state.deck, state.knowledge, state.info_tokens) == snapshot
    assert state.knowledge[0][0] is FRESH_KNOWLEDGE
