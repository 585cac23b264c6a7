"""Training loops: reconstruction pretraining and 4-way similarity training.

Adam throughout (1e-3 for pretraining, 1e-4 for the symbolic stage), MSE for
reconstruction, cross-entropy over the four candidates, early stopping on a
held-out validation split. The frozen regime never touches autoencoder
parameters (verified bitwise by checksum); the unfrozen regime trains the
autoencoder and similarity network end to end through the bottleneck.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass

import torch
from torch import nn

from .data import Corpus, QuestionSet
from .models import DeepConvAE, SimilarityNet, SymbolicAE

REGIMES = ("frozen", "unfrozen")


@dataclass(frozen=True)
class TrainConfig:
    lr_pretrain: float = 1e-3
    lr_symbolic: float = 1e-4
    epochs: int = 100
    patience: int = 10
    val_size: int = 500
    batch_size: int = 64
    warmup_epochs: int = 5  # deep model: plain conv phase before the swap
    regime: str = "frozen"
    aux_recon: bool = False
    seed: int = 0

    def __post_init__(self):
        if self.regime not in REGIMES:
            raise ValueError(f"regime must be one of {REGIMES}")
        for name in ("lr_pretrain", "lr_symbolic", "epochs", "patience",
                     "val_size", "batch_size"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")


@dataclass
class History:
    train_loss: list[float]
    val_loss: list[float]
    stopped_epoch: int  # number of completed epochs


def param_checksum(model: nn.Module) -> str:
    """Bitwise fingerprint of every parameter and buffer."""
    digest = hashlib.sha256()
    for name, tensor in sorted(model.state_dict().items()):
        digest.update(name.encode())
        digest.update(tensor.detach().cpu().contiguous().numpy().tobytes())
    return digest.hexdigest()


def _split(n: int, config: TrainConfig) -> tuple[torch.Tensor, torch.Tensor]:
    """Deterministic train/validation index split."""
    generator = torch.Generator().manual_seed(config.seed)
    order = torch.randperm(n, generator=generator)
    val = min(config.val_size, max(1, n // 5))
    return order[val:], order[:val]


class _EarlyStop:
    def __init__(self, patience: int):
        self.patience = patience
        self.best = float("inf")
        self.stale = 0

    def step(self, loss: float) -> bool:
        """Record one validation loss; true when patience is exhausted."""
        if loss < self.best - 1e-9:
            self.best = loss
            self.stale = 0
            return False
        self.stale += 1
        return self.stale >= self.patience

    def reset(self):
        self.best = float("inf")
        self.stale = 0


def _batches(indices: torch.Tensor, batch_size: int, generator: torch.Generator):
    shuffled = indices[torch.randperm(len(indices), generator=generator)]
    for start in range(0, len(shuffled), batch_size):
        yield shuffled[start : start + batch_size]


def pretrain_reconstruction(
    model: SymbolicAE, corpus: Corpus, config: TrainConfig
) -> History:
    """MSE image-reconstruction training with early stopping.

    A deep conv model warms up for `warmup_epochs` as a plain autoencoder,
    then the symbolic bottleneck is enabled and the early-stopping state
    resets (the swap changes the loss scale).
    """
    torch.manual_seed(config.seed)
    train_idx, val_idx = _split(len(corpus), config)
    images = corpus.images
    optimizer = torch.optim.Adam(model.parameters(), lr=config.lr_pretrain)
    loss_fn = nn.MSELoss()
    generator = torch.Generator().manual_seed(config.seed + 1)
    stopper = _EarlyStop(config.patience)
    warmup = config.warmup_epochs if isinstance(model, DeepConvAE) else 0
    history = History([], [], 0)

    def validation_loss() -> float:
        model.eval()
        with torch.no_grad():
            total = 0.0
            for start in range(0, len(val_idx), config.batch_size):
                batch = images[val_idx[start : start + config.batch_size]]
                recon = model(batch)[0]
                total += loss_fn(recon, batch).item() * len(batch)
        return total / len(val_idx)

    for epoch in range(config.epochs):
        if warmup and epoch == warmup:
            model.enable_symbolic()
            stopper.reset()
        model.train()
        running, seen = 0.0, 0
        for batch_idx in _batches(train_idx, config.batch_size, generator):
            batch = images[batch_idx]
            recon = model(batch)[0]
            loss = loss_fn(recon, batch)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            running += loss.item() * len(batch)
            seen += len(batch)
        if torch.isnan(torch.tensor(running)):
            raise RuntimeError("training diverged (loss is NaN)")
        history.train_loss.append(running / seen)
        history.val_loss.append(validation_loss())
        history.stopped_epoch = epoch + 1
        if epoch >= warmup and stopper.step(history.val_loss[-1]):
            break
    if isinstance(model, DeepConvAE) and not model.symbolic_enabled:
        model.enable_symbolic()
    model.eval()
    return history


def _reconstruct(model: SymbolicAE, targets: torch.Tensor, trainable: bool):
    if trainable:
        return model(targets)[0]
    with torch.no_grad():
        return model(targets)[0]


def train_similarity(
    ae: SymbolicAE,
    sim: SimilarityNet,
    questions: QuestionSet,
    config: TrainConfig,
) -> History:
    """Cross-entropy over the four candidates against the reconstructed
    target. Frozen: the autoencoder stays in eval mode, gradient-free, and
    bitwise unchanged. Unfrozen: end-to-end through the straight-through
    bottleneck, optionally keeping an auxiliary reconstruction term."""
    torch.manual_seed(config.seed)
    frozen = config.regime == "frozen"
    train_idx, val_idx = _split(len(questions), config)
    params = list(sim.parameters())
    if not frozen:
        params += list(ae.parameters())
    optimizer = torch.optim.Adam(params, lr=config.lr_symbolic)
    loss_fn = nn.CrossEntropyLoss()
    mse = nn.MSELoss()
    generator = torch.Generator().manual_seed(config.seed + 1)
    stopper = _EarlyStop(config.patience)
    history = History([], [], 0)
    targets_all = questions.targets

    def forward(idx: torch.Tensor) -> torch.Tensor:
        targets = targets_all[idx]
        recon = _reconstruct(ae, targets, trainable=not frozen)
        logits = sim(recon, questions.candidates[idx])
        loss = loss_fn(logits, questions.correct[idx])
        if not frozen and config.aux_recon:
            loss = loss + mse(recon, targets)
        return loss

    def validation_loss() -> float:
        sim.eval()
        ae.eval()
        with torch.no_grad():
            total = 0.0
            for start in range(0, len(val_idx), config.batch_size):
                idx = val_idx[start : start + config.batch_size]
                total += forward(idx).item() * len(idx)
        return total / len(val_idx)

    for epoch in range(config.epochs):
        sim.train()
        if frozen:
            ae.eval()
        else:
            ae.train()
        running, seen = 0.0, 0
        for idx in _batches(train_idx, config.batch_size, generator):
            loss = forward(idx)
            optimizer.zero_grad()
            loss.backward()
            optimizer.step()
            running += loss.item() * len(idx)
            seen += len(idx)
        history.train_loss.append(running / seen)
        history.val_loss.append(validation_loss())
        history.stopped_epoch = epoch + 1
        if stopper.step(history.val_loss[-1]):
            break
    sim.eval()
    ae.eval()
    return history
