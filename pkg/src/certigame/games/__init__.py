from .base import (DEFAULT_NODE_CAP, GameRules, Observation, OracleTooLargeError,
                   Trajectory, TreeGame, UnknownGameError, get_game,
                   node_from_observation, oracle, play, register_game,
                   trajectory_record)
from .bandit import Bandit, make_bandit
from .goofspiel import Goofspiel
from .kuhn import Kuhn
from .leduc import Leduc

__all__ = [
    "DEFAULT_NODE_CAP", "GameRules", "Observation", "OracleTooLargeError",
    "Trajectory", "TreeGame", "UnknownGameError", "get_game",
    "node_from_observation", "oracle", "play", "register_game",
    "trajectory_record",
    "Bandit", "make_bandit", "Goofspiel", "Kuhn", "Leduc",
]
