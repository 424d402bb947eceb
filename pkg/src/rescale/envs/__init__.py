from .base import Environment, InvalidActionError
from .game24 import (Game24Env, Game24State, game24_legal_actions,
                     game24_reward, game24_solvable)
from .synthetic import (SyntheticEnv, SyntheticTreeMDP, synth_generate,
                        synth_optimal_values)

__all__ = [
    "Environment",
    "Game24Env",
    "Game24State",
    "InvalidActionError",
    "SyntheticEnv",
    "SyntheticTreeMDP",
    "game24_legal_actions",
    "game24_reward",
    "game24_solvable",
    "synth_generate",
    "synth_optimal_values",
]
