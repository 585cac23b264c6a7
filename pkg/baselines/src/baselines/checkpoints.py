"""Checkpoints: native serialized weights plus a human-readable sidecar.

Every `<name>.pt` gets a `<name>.pt.txt` recording the architecture, the
full configuration, and the digest of the dataset it was trained on, so a
checkpoint is auditable without loading it.
"""

from __future__ import annotations

from dataclasses import asdict
from pathlib import Path

import torch

from .bottleneck import BottleneckConfig
from .models import ModelConfig, SimilarityNet, SymbolicAE, build_model


def _sidecar(path: Path, fields: dict) -> None:
    lines = [f"{key}: {value}" for key, value in fields.items()]
    path.with_suffix(path.suffix + ".txt").write_text(
        "\n".join(lines) + "\n", encoding="utf-8"
    )


def save_ae(path: str | Path, model: SymbolicAE, **sidecar_fields) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(
        {
            "kind": "ae",
            "model_config": asdict(model.config),
            "symbolic_enabled": getattr(model, "symbolic_enabled", True),
            "state_dict": model.state_dict(),
        },
        path,
    )
    _sidecar(path, {"kind": "ae", **asdict(model.config), **sidecar_fields})
    return path


def load_ae(path: str | Path) -> SymbolicAE:
    blob = torch.load(path, weights_only=True)
    if blob.get("kind") != "ae":
        raise ValueError(f"{path}: not an autoencoder checkpoint")
    raw = dict(blob["model_config"])
    raw["bottleneck"] = BottleneckConfig(**raw["bottleneck"])
    model = build_model(ModelConfig(**raw))
    if blob["symbolic_enabled"] and hasattr(model, "enable_symbolic"):
        model.enable_symbolic()
    model.load_state_dict(blob["state_dict"])
    model.eval()
    return model


def save_sim(path: str | Path, model: SimilarityNet, **sidecar_fields) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    torch.save(
        {
            "kind": "sim",
            "width": model.project.out_features,
            "state_dict": model.state_dict(),
        },
        path,
    )
    _sidecar(path, {"kind": "sim", "width": model.project.out_features,
                    **sidecar_fields})
    return path


def load_sim(path: str | Path) -> SimilarityNet:
    blob = torch.load(path, weights_only=True)
    if blob.get("kind") != "sim":
        raise ValueError(f"{path}: not a similarity checkpoint")
    model = SimilarityNet(blob["width"])
    model.load_state_dict(blob["state_dict"])
    model.eval()
    return model
