"""Hanabi referee, rule-based agents and ad-hoc teamwork analysis."""

from .agents import AgentSpec, RuleAgent, builtin_agent, load_agents
from .engine import GameState, Move, MoveKind, Observation, apply_move, new_game, observe
from .harness import GameRecord, PairwiseTable, play_game, run_pairing, run_tournament

__version__ = "0.1.0"

__all__ = [
    "AgentSpec",
    "GameRecord",
    "GameState",
    "Move",
    "MoveKind",
    "Observation",
    "PairwiseTable",
    "RuleAgent",
    "apply_move",
    "builtin_agent",
    "load_agents",
    "new_game",
    "observe",
    "play_game",
    "run_pairing",
    "run_tournament",
]
