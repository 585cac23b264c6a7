"""The model zoo: three symbolic autoencoders and a similarity network.

Every autoencoder maps an image through L discrete symbols and back:

- shallow: one conv layer straight into the bottleneck, MLP decoder
- deep: three-block residual conv autoencoder; the symbolic stage is
  spliced into the middle after a convolutional warm-up
- transformer: learnable queries cross-attend over visual features to emit
  symbols; a self-attention encoder maps symbols back to a feature map

The similarity network embeds images into a 128-dim space and scores the
four candidates by cosine against the reconstructed target.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import torch
from torch import nn

from .bottleneck import BottleneckConfig, gumbel_bottleneck

ARCHITECTURES = ("shallow", "deep", "transformer")


@dataclass(frozen=True)
class ModelConfig:
    architecture: str = "shallow"
    bottleneck: BottleneckConfig = field(default_factory=BottleneckConfig)
    image_side: int = 40
    decoder_width: int = 128  # symbol projection width D (shallow decoder)
    dropout: float = 0.2
    d_model: int = 512  # transformer decoder width
    symbol_width: int = 128  # transformer symbol embedding width
    n_heads: int = 4
    n_layers: int = 2
    noise_sigma: float = 0.1  # train-time logit noise (transformer)

    def __post_init__(self):
        if self.architecture not in ARCHITECTURES:
            raise ValueError(f"architecture must be one of {ARCHITECTURES}")
        if self.image_side % 8:
            raise ValueError("image_side must be divisible by 8")


class SymbolicAE(nn.Module):
    """Common contract: image -> logits -> symbols -> reconstruction."""

    def __init__(self, config: ModelConfig):
        super().__init__()
        self.config = config
        self.bottleneck = config.bottleneck

    def logits(self, images: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError

    def decode(self, symbols: torch.Tensor) -> torch.Tensor:
        raise NotImplementedError

    def forward(self, images, noise=None):
        logits = self.logits(images)
        symbols, messages = gumbel_bottleneck(
            logits, self.bottleneck, self.training, noise
        )
        return self.decode(symbols), symbols, messages


class _ResidualUnit(nn.Module):
    def __init__(self, channels: int):
        super().__init__()
        self.conv1 = nn.Conv2d(channels, channels, 3, padding=1)
        self.conv2 = nn.Conv2d(channels, channels, 3, padding=1)
        self.act = nn.ReLU()

    def forward(self, x):
        return self.act(x + self.conv2(self.act(self.conv1(x))))


class ShallowAE(SymbolicAE):
    """Dropout2d -> Conv2d(1, 64, 3) -> ReLU -> AdaptiveAvgPool2d((1, L))
    -> Conv1d(64, K, 1), decoded by a shared K->D token projection and a
    two-layer MLP to the pixel grid with a sigmoid."""

    def __init__(self, config: ModelConfig):
        super().__init__(config)
        L, K = config.bottleneck.length, config.bottleneck.vocab
        self.encoder = nn.Sequential(
            nn.Dropout2d(config.dropout),
            nn.Conv2d(1, 64, 3),
            nn.ReLU(),
            nn.AdaptiveAvgPool2d((1, L)),
        )
        self.to_logits = nn.Conv1d(64, K, 1)
        self.embed = nn.Linear(K, config.decoder_width)
        side = config.image_side
        self.mlp = nn.Sequential(
            nn.Linear(L * config.decoder_width, 256),
            nn.ReLU(),
            nn.Linear(256, side * side),
            nn.Sigmoid(),
        )

    def logits(self, images):
        h = self.encoder(images).squeeze(2)  # [B, 64, L]
        return self.to_logits(h).transpose(1, 2)  # [B, L, K]

    def decode(self, symbols):
        tokens = self.embed(symbols)  # [B, L, D]
        side = self.config.image_side
        return self.mlp(tokens.flatten(1)).view(-1, 1, side, side)


class DeepConvAE(SymbolicAE):
    """Three stride-2 residual encoder blocks down to a 128-channel map,
    mirrored by bilinear-upsampling decoder blocks. Starts as a plain
    convolutional autoencoder; `enable_symbolic()` splices a 2-layer MLP
    encoder/decoder pair around the bottleneck after the warm-up."""

    def __init__(self, config: ModelConfig):
        super().__init__(config)
        self.symbolic_enabled = False
        blocks = []
        prev = 1
        for ch in (32, 64, 128):
            blocks += [
                nn.Conv2d(prev, ch, 3, stride=2, padding=1),
                nn.ReLU(),
                _ResidualUnit(ch),
            ]
            prev = ch
        self.encoder = nn.Sequential(*blocks)
        blocks = []
        for cin, cout in ((128, 64), (64, 32), (32, 16)):
            blocks += [
                nn.Upsample(scale_factor=2, mode="bilinear", align_corners=False),
                nn.Conv2d(cin, cout, 3, padding=1),
                nn.ReLU(),
                _ResidualUnit(cout),
            ]
        blocks += [nn.Conv2d(16, 1, 3, padding=1), nn.Sigmoid()]
        self.decoder = nn.Sequential(*blocks)

        grid = config.image_side // 8
        self._feature_shape = (128, grid, grid)
        features = 128 * grid * grid
        L, K = config.bottleneck.length, config.bottleneck.vocab
        self.symbol_encoder = nn.Sequential(
            nn.Linear(features, 512), nn.ReLU(), nn.Linear(512, L * K)
        )
        self.symbol_decoder = nn.Sequential(
            nn.Linear(L * K, 512), nn.ReLU(), nn.Linear(512, features)
        )

    def enable_symbolic(self):
        self.symbolic_enabled = True

    def logits(self, images):
        L, K = self.bottleneck.length, self.bottleneck.vocab
        features = self.encoder(images).flatten(1)
        return self.symbol_encoder(features).view(-1, L, K)

    def decode(self, symbols):
        features = self.symbol_decoder(symbols.flatten(1))
        return self.decoder(features.view(-1, *self._feature_shape))

    def forward(self, images, noise=None):
        if not self.symbolic_enabled:
            return self.decoder(self.encoder(images)), None, []
        return super().forward(images, noise)


class SymbolicTransformer(SymbolicAE):
    """L learnable queries cross-attend over projected visual features to
    produce per-position symbol logits (with train-time Gaussian noise);
    symbols are embedded, self-attended, fused (mean + flattened sequence)
    and projected back to a 32-channel feature map for upsampling."""

    def __init__(self, config: ModelConfig):
        super().__init__(config)
        L, K = config.bottleneck.length, config.bottleneck.vocab
        grid = config.image_side // 8
        self._grid = grid
        self.stem = nn.Sequential(
            nn.Conv2d(1, 16, 3, stride=2, padding=1),
            nn.ReLU(),
            nn.Conv2d(16, 32, 3, stride=2, padding=1),
            nn.ReLU(),
            nn.Conv2d(32, 32, 3, stride=2, padding=1),
            nn.ReLU(),
        )
        self.memory_proj = nn.Linear(32, config.d_model)
        self.queries = nn.Parameter(torch.randn(L, config.d_model) * 0.02)
        self.query_pos = nn.Parameter(torch.randn(L, config.d_model) * 0.02)
        layer = nn.TransformerDecoderLayer(
            config.d_model, config.n_heads, dropout=config.dropout, batch_first=True
        )
        self.cross_decoder = nn.TransformerDecoder(layer, config.n_layers)
        self.heads = nn.ModuleList(
            nn.Sequential(nn.Dropout(config.dropout), nn.Linear(config.d_model, K))
            for _ in range(L)
        )

        self.symbol_embed = nn.Linear(K, config.symbol_width)
        self.symbol_pos = nn.Parameter(torch.randn(L, config.symbol_width) * 0.02)
        enc_layer = nn.TransformerEncoderLayer(
            config.symbol_width, config.n_heads, dropout=config.dropout,
            batch_first=True,
        )
        self.self_encoder = nn.TransformerEncoder(enc_layer, config.n_layers)
        self.fuse = nn.Linear(config.symbol_width * (L + 1), 32 * grid * grid)
        self.upsample = nn.Sequential(
            nn.Upsample(scale_factor=2, mode="bilinear", align_corners=False),
            nn.Conv2d(32, 16, 3, padding=1),
            nn.ReLU(),
            nn.Upsample(scale_factor=2, mode="bilinear", align_corners=False),
            nn.Conv2d(16, 8, 3, padding=1),
            nn.ReLU(),
            nn.Upsample(scale_factor=2, mode="bilinear", align_corners=False),
            nn.Conv2d(8, 1, 3, padding=1),
            nn.Sigmoid(),
        )

    def logits(self, images):
        memory = self.stem(images).flatten(2).transpose(1, 2)  # [B, grid^2, 32]
        memory = self.memory_proj(memory)
        queries = (self.queries + self.query_pos).unsqueeze(0)
        queries = queries.expand(images.shape[0], -1, -1)
        hidden = self.cross_decoder(queries, memory)  # [B, L, d_model]
        logits = torch.stack(
            [head(hidden[:, i]) for i, head in enumerate(self.heads)], dim=1
        )
        if self.training and self.config.noise_sigma:
            logits = logits + self.config.noise_sigma * torch.randn_like(logits)
        return logits

    def decode(self, symbols):
        tokens = self.symbol_embed(symbols) + self.symbol_pos
        hidden = self.self_encoder(tokens)  # [B, L, symbol_width]
        fused = torch.cat([hidden.mean(dim=1), hidden.flatten(1)], dim=1)
        features = self.fuse(fused).view(-1, 32, self._grid, self._grid)
        return self.upsample(features)


_CLASSES = {
    "shallow": ShallowAE,
    "deep": DeepConvAE,
    "transformer": SymbolicTransformer,
}


def build_model(config: ModelConfig) -> SymbolicAE:
    return _CLASSES[config.architecture](config)


def parameter_count(model: nn.Module) -> int:
    return sum(p.numel() for p in model.parameters())


class SimilarityNet(nn.Module):
    """Conv -> ReLU -> MaxPool -> AdaptiveAvgPool((4, 4)) -> Linear into a
    128-dim space; candidates are scored by scaled cosine similarity
    against the reconstructed target."""

    def __init__(self, width: int = 128):
        super().__init__()
        self.features = nn.Sequential(
            nn.Conv2d(1, 32, 3),
            nn.ReLU(),
            nn.MaxPool2d(2),
            nn.AdaptiveAvgPool2d((4, 4)),
        )
        self.project = nn.Linear(32 * 16, width)
        self.scale = nn.Parameter(torch.tensor(10.0))

    def embed(self, images: torch.Tensor) -> torch.Tensor:
        h = self.features(images).flatten(1)
        return nn.functional.normalize(self.project(h), dim=-1)

    def forward(self, target: torch.Tensor, candidates: torch.Tensor) -> torch.Tensor:
        """target [B, 1, H, W], candidates [B, 4, 1, H, W] -> logits [B, 4]."""
        b, n = candidates.shape[:2]
        anchor = self.embed(target)  # [B, width]
        options = self.embed(candidates.flatten(0, 1)).view(b, n, -1)
        cosine = torch.einsum("bw,bnw->bn", anchor, options)
        return self.scale * cosine
