"""Agent adapter: serve a trained model pair over the game's stdio protocol.

One process answers both roles with line-delimited JSON. Speaker frames
carry an image path and get back a message; listener frames carry a message
plus four candidate paths and get back a choice; feedback frames (no role)
are one-way and produce no reply. Similarity ties resolve to the lowest
candidate index (argmax returns the first maximum).
"""

from __future__ import annotations

import json
import sys
from typing import IO

import torch

from .bottleneck import message_to_symbols
from .data import read_pgm
from .models import SimilarityNet, SymbolicAE


def answer(frame: dict, ae: SymbolicAE, sim: SimilarityNet) -> dict | None:
    role = frame.get("role")
    if role is None:
        return None  # feedback frame: one-way
    if role == "speaker":
        image = read_pgm(frame["image_path"]).unsqueeze(0)
        with torch.no_grad():
            _, _, messages = ae(image)
        return {"message": messages[0]}
    if role == "listener":
        symbols = message_to_symbols(frame["message"], ae.bottleneck)
        candidates = torch.stack(
            [read_pgm(path) for path in frame["candidate_paths"]]
        ).unsqueeze(0)
        with torch.no_grad():
            recon = ae.decode(symbols)
            logits = sim(recon, candidates)
        return {"choice": int(logits.argmax(dim=1).item())}
    raise ValueError(f"unknown role {role!r}")


def serve(ae: SymbolicAE, sim: SimilarityNet,
          stdin: IO[str] = sys.stdin, stdout: IO[str] = sys.stdout) -> None:
    ae.eval()
    sim.eval()
    for line in stdin:
        line = line.strip()
        if not line:
            continue
        reply = answer(json.loads(line), ae, sim)
        if reply is not None:
            stdout.write(json.dumps(reply) + "\n")
            stdout.flush()
