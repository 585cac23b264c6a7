"""Gumbel-Softmax symbolic bottleneck.

Training mode draws relaxed categorical samples and passes hard one-hot
vectors forward with a straight-through gradient; eval mode is a plain
argmax. Each of the L one-hot rows maps to one character of the game
alphabet, so bottleneck outputs double as game messages.

The sampler takes injectable noise instead of using the framework's fused
gumbel_softmax: a fixed noise tensor makes the straight-through gradient
checkable against finite differences on the soft path.
"""

from __future__ import annotations

from dataclasses import dataclass

import torch

ALPHABET = "ABC012+*"


@dataclass(frozen=True)
class BottleneckConfig:
    length: int = 8  # symbols per message (L)
    vocab: int = 8  # categories per symbol (K)
    tau: float = 0.5
    hard: bool = True  # straight-through one-hot forward during training

    def __post_init__(self):
        if self.length < 1:
            raise ValueError("length must be >= 1")
        if self.vocab < 2:
            raise ValueError("vocab must be >= 2")
        if not self.tau > 0:
            raise ValueError("tau must be > 0")
        if self.vocab > len(ALPHABET):
            raise ValueError(f"vocab cannot exceed {len(ALPHABET)} characters")


def sample_gumbel(shape, generator: torch.Generator | None = None) -> torch.Tensor:
    uniform = torch.rand(shape, generator=generator)
    exponential = -torch.log(uniform.clamp_min(1e-20))
    return -torch.log(exponential.clamp_min(1e-20))


def relaxed_symbols(logits: torch.Tensor, cfg: BottleneckConfig,
                    noise: torch.Tensor) -> torch.Tensor:
    """The differentiable soft path: softmax((logits + noise) / tau)."""
    return torch.softmax((logits + noise) / cfg.tau, dim=-1)


def _one_hot(index: torch.Tensor, like: torch.Tensor) -> torch.Tensor:
    return torch.zeros_like(like).scatter_(-1, index.unsqueeze(-1), 1.0)


def gumbel_bottleneck(
    logits: torch.Tensor,
    cfg: BottleneckConfig,
    training: bool,
    noise: torch.Tensor | None = None,
) -> tuple[torch.Tensor, list[str]]:
    """Logits [B, L, K] -> (symbols [B, L, K], one message string per row).

    Training: hard one-hot forward, gradient of the relaxed sample
    (straight-through). Eval: deterministic argmax one-hot.
    """
    if logits.shape[-2:] != (cfg.length, cfg.vocab):
        raise ValueError(
            f"logits shaped {tuple(logits.shape)}, wanted [*, {cfg.length}, {cfg.vocab}]"
        )
    if training:
        if noise is None:
            noise = sample_gumbel(logits.shape)
        soft = relaxed_symbols(logits, cfg, noise)
        if cfg.hard:
            hard = _one_hot(soft.argmax(dim=-1), soft)
            symbols = hard + soft - soft.detach()
        else:
            symbols = soft
    else:
        symbols = _one_hot(logits.argmax(dim=-1), logits)
    indices = symbols.detach().argmax(dim=-1)
    messages = ["".join(ALPHABET[i] for i in row) for row in indices.tolist()]
    return symbols, messages


def message_to_symbols(message: str, cfg: BottleneckConfig) -> torch.Tensor:
    """A message string as a one-hot tensor [1, L, K].

    Characters outside the vocabulary map to index 0; short messages are
    padded with the last alphabet character (the cheapest 'filler' symbol),
    long ones truncated — external speakers may be humans.
    """
    pad = ALPHABET[cfg.vocab - 1]
    text = (message[: cfg.length] + pad * cfg.length)[: cfg.length]
    indices = [
        ALPHABET.index(ch) if ch in ALPHABET[: cfg.vocab] else 0 for ch in text
    ]
    one_hot = torch.zeros(1, cfg.length, cfg.vocab)
    one_hot[0, torch.arange(cfg.length), indices] = 1.0
    return one_hot
