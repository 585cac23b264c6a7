"""Bottleneck sampling, gradients, and the symbol/character mapping."""

import pytest
import torch

from baselines.bottleneck import (
    ALPHABET,
    BottleneckConfig,
    gumbel_bottleneck,
    message_to_symbols,
    relaxed_symbols,
    sample_gumbel,
)

CFG = BottleneckConfig()


def one_hot_rows(symbols):
    return (
        torch.all((symbols == 0) | (symbols == 1))
        and torch.all(symbols.sum(dim=-1) == 1)
    )


class TestConfig:
    @pytest.mark.parametrize(
        "kwargs",
        [
            {"length": 0},
            {"vocab": 1},
            {"vocab": 9},
            {"tau": 0.0},
            {"tau": -1.0},
        ],
    )
    def test_invariants(self, kwargs):
        with pytest.raises(ValueError):
            BottleneckConfig(**kwargs)

    def test_defaults(self):
        assert (CFG.length, CFG.vocab, CFG.tau, CFG.hard) == (8, 8, 0.5, True)


class TestEvalMode:
    def test_rows_exactly_one_hot(self):
        logits = torch.randn(3, CFG.length, CFG.vocab)
        symbols, messages = gumbel_bottleneck(logits, CFG, training=False)
        assert symbols.shape == (3, 8, 8)
        assert one_hot_rows(symbols)
        assert [len(m) for m in messages] == [8, 8, 8]
        assert all(ch in ALPHABET for m in messages for ch in m)

    def test_deterministic(self):
        logits = torch.randn(2, CFG.length, CFG.vocab)
        first = gumbel_bottleneck(logits, CFG, training=False)
        second = gumbel_bottleneck(logits, CFG, training=False)
        assert torch.equal(first[0], second[0])
        assert first[1] == second[1]

    def test_message_matches_argmax(self):
        logits = torch.zeros(1, CFG.length, CFG.vocab)
        for i in range(CFG.length):
            logits[0, i, i % CFG.vocab] = 5.0
        _, messages = gumbel_bottleneck(logits, CFG, training=False)
        assert messages[0] == ALPHABET


class TestTrainingMode:
    def test_straight_through_forward_is_discrete(self):
        # forward values sit on the one-hot vertices (up to fp rounding of
        # the hard + soft - soft.detach() trick); gradients flow regardless
        logits = torch.randn(4, CFG.length, CFG.vocab, requires_grad=True)
        symbols, _ = gumbel_bottleneck(logits, CFG, training=True)
        rounded = symbols.detach().round()
        assert one_hot_rows(rounded)
        assert torch.allclose(symbols.detach(), rounded, atol=1e-6)
        symbols.sum().backward()
        assert logits.grad is not None

    def test_soft_rows_sum_to_one(self):
        cfg = BottleneckConfig(hard=False)
        logits = torch.randn(4, cfg.length, cfg.vocab)
        symbols, _ = gumbel_bottleneck(logits, cfg, training=True)
        assert torch.allclose(symbols.sum(dim=-1), torch.ones(4, 8), atol=1e-5)
        assert torch.all(symbols > 0)

    def test_forward_value_is_argmax_of_relaxation(self):
        logits = torch.randn(2, CFG.length, CFG.vocab)
        noise = sample_gumbel(logits.shape, torch.Generator().manual_seed(5))
        symbols, _ = gumbel_bottleneck(logits, CFG, training=True, noise=noise)
        soft = relaxed_symbols(logits, CFG, noise)
        assert torch.equal(symbols.detach().argmax(-1), soft.argmax(-1))

    def test_low_temperature_matches_eval_argmax(self):
        # straight-through invariant: at tau -> 0 the relaxation collapses
        # onto the eval-mode one-hot rows (noise suppressed); rungs 0.5
        # apart saturate the softmax at tau=0.01
        cfg = BottleneckConfig(tau=0.01)
        generator = torch.Generator().manual_seed(9)
        rungs = torch.arange(cfg.vocab, dtype=torch.float64) / 2
        logits = torch.stack(
            [
                rungs[torch.randperm(cfg.vocab, generator=generator)]
                for _ in range(3 * cfg.length)
            ]
        ).view(3, cfg.length, cfg.vocab)
        soft = relaxed_symbols(logits, cfg, torch.zeros_like(logits))
        hard, _ = gumbel_bottleneck(logits, cfg, training=False)
        assert torch.allclose(soft, hard.double(), atol=1e-4)

    def test_gradient_matches_finite_differences(self):
        # toy case: one position, four categories, fixed noise, linear loss;
        # the straight-through gradient must match central differences of
        # the soft path within 1e-3 relative error
        cfg = BottleneckConfig(length=1, vocab=4, tau=0.5)
        torch.manual_seed(0)
        base = torch.randn(1, 1, 4, dtype=torch.float64)
        noise = sample_gumbel(base.shape, torch.Generator().manual_seed(1)).double()
        weights = torch.tensor([[[0.7, -1.3, 0.4, 2.1]]], dtype=torch.float64)

        logits = base.clone().requires_grad_(True)
        symbols, _ = gumbel_bottleneck(logits, cfg, training=True, noise=noise)
        (weights * symbols).sum().backward()
        analytic = logits.grad.clone()

        eps = 1e-6
        numeric = torch.zeros_like(base)
        for k in range(4):
            for sign, bump in ((1, eps), (-1, -eps)):
                shifted = base.clone()
                shifted[0, 0, k] += bump
                soft = relaxed_symbols(shifted, cfg, noise)
                numeric[0, 0, k] += sign * (weights * soft).sum()
        numeric /= 2 * eps

        scale = numeric.abs().clamp_min(1e-12)
        assert ((analytic - numeric).abs() / scale).max().item() <= 1e-3

    def test_shape_mismatch_raises(self):
        with pytest.raises(ValueError, match="logits shaped"):
            gumbel_bottleneck(torch.randn(2, 3, 8), CFG, training=True)


class TestMessageToSymbols:
    def test_identity_round_trip(self):
        one_hot = message_to_symbols(ALPHABET, CFG)
        assert one_hot.shape == (1, 8, 8)
        assert one_hot_rows(one_hot)
        assert one_hot[0].argmax(-1).tolist() == list(range(8))

    def test_pads_short_messages(self):
        one_hot = message_to_symbols("AB", CFG)
        indices = one_hot[0].argmax(-1).tolist()
        assert indices[:2] == [0, 1]
        assert indices[2:] == [7] * 6  # padded with the last character

    def test_truncates_long_messages(self):
        one_hot = message_to_symbols(ALPHABET + "CCC", CFG)
        assert one_hot[0].argmax(-1).tolist() == list(range(8))

    def test_foreign_characters_map_to_zero(self):
        one_hot = message_to_symbols("Zx!?" + "0000", CFG)
        assert one_hot[0].argmax(-1).tolist()[:4] == [0, 0, 0, 0]

    def test_bottleneck_messages_survive_the_round_trip(self):
        logits = torch.randn(5, CFG.length, CFG.vocab)
        symbols, messages = gumbel_bottleneck(logits, CFG, training=False)
        for row, message in zip(symbols, messages):
            back = message_to_symbols(message, CFG)
            assert torch.equal(back[0], row)
