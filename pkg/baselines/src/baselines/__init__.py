"""Neural baseline agents for the shape-naming game.

Autoencoders with a discrete message bottleneck, a similarity network for
the 4-way listener choice, and a stdio adapter so trained pairs can play
through the game's own CLI.
"""

from .bottleneck import ALPHABET, BottleneckConfig, gumbel_bottleneck, message_to_symbols
from .models import (
    ARCHITECTURES,
    DeepConvAE,
    ModelConfig,
    ShallowAE,
    SimilarityNet,
    SymbolicTransformer,
    build_model,
)
from .training import TrainConfig, param_checksum, pretrain_reconstruction, train_similarity

__all__ = [
    "ALPHABET",
    "ARCHITECTURES",
    "BottleneckConfig",
    "DeepConvAE",
    "ModelConfig",
    "ShallowAE",
    "SimilarityNet",
    "SymbolicTransformer",
    "TrainConfig",
    "build_model",
    "gumbel_bottleneck",
    "message_to_symbols",
    "param_checksum",
    "pretrain_reconstruction",
    "train_similarity",
]
