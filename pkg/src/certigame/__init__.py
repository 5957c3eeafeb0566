"""Anytime equilibrium certificates for black-box extensive-form games."""

from .efg import (BehaviorProfile, CertigameError, ChancePolicyError, GameTree,
                  IncompleteProfileError, InvalidSequenceFormError, Node,
                  PseudogameRequiredError, SequenceStrategy,
                  ZeroSumRequiredError, average_profile, best_response,
                  expected_value, from_sequence_form, nash_gap,
                  to_sequence_form, uniform_profile)
from .games import (GameRules, Observation, OracleTooLargeError, Trajectory,
                    TreeGame, UnknownGameError, get_game, make_bandit, oracle,
                    play, register_game)

__version__ = "0.1.0"
