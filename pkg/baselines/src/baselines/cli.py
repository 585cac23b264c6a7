"""Command line interface.

    shapegame-baselines pretrain --data desk/corpus --arch shallow --out ae.pt
    shapegame-baselines train-sim --ae ae.pt --data desk/train --out sim.pt
    shapegame-baselines agent --ae ae.pt --sim sim.pt      (stdio game agent)
    shapegame-baselines probe --ae ae.pt --data desk/corpus

Accuracy evaluation is not done here: expose the trained pair with `agent`
and let the game's own `play`/`score` commands produce the results table.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import asdict

from .adapter import serve
from .bottleneck import BottleneckConfig
from .checkpoints import load_ae, load_sim, save_ae, save_sim
from .data import dataset_digest, load_corpus, load_questions
from .models import ARCHITECTURES, ModelConfig, SimilarityNet, build_model, parameter_count
from .probe import probe_reconstructions
from .training import (
    TrainConfig,
    param_checksum,
    pretrain_reconstruction,
    train_similarity,
)


def _train_config(args, **overrides) -> TrainConfig:
    return TrainConfig(
        epochs=args.epochs,
        patience=args.patience,
        val_size=args.val_size,
        batch_size=args.batch_size,
        seed=args.seed,
        **overrides,
    )


def cmd_pretrain(args) -> int:
    corpus = load_corpus(args.data)
    config = ModelConfig(
        architecture=args.arch,
        bottleneck=BottleneckConfig(args.length, args.vocab, args.tau),
        decoder_width=args.decoder_width,
    )
    model = build_model(config)
    train = _train_config(args, warmup_epochs=args.warmup)
    history = pretrain_reconstruction(model, corpus, train)
    save_ae(
        args.out, model,
        dataset=args.data, dataset_digest=dataset_digest(args.data),
        train_config=asdict(train), epochs_run=history.stopped_epoch,
        final_val_loss=f"{history.val_loss[-1]:.6f}",
        parameters=parameter_count(model),
    )
    print(
        f"pretrained {args.arch} ({parameter_count(model)} params) "
        f"for {history.stopped_epoch} epochs, "
        f"val MSE {history.val_loss[-1]:.6f} -> {args.out}"
    )
    return 0


def cmd_train_sim(args) -> int:
    ae = load_ae(args.ae)
    questions = load_questions(args.data)
    sim = SimilarityNet()
    train = _train_config(args, regime=args.regime, aux_recon=args.aux_recon)
    before = param_checksum(ae)
    history = train_similarity(ae, sim, questions, train)
    changed = param_checksum(ae) != before
    if args.regime == "frozen" and changed:
        print("error: frozen run changed autoencoder parameters", file=sys.stderr)
        return 1
    save_sim(
        args.out, sim,
        dataset=args.data, dataset_digest=dataset_digest(args.data),
        regime=args.regime, ae_checkpoint=args.ae,
        train_config=asdict(train), epochs_run=history.stopped_epoch,
        final_val_loss=f"{history.val_loss[-1]:.6f}",
    )
    if changed and args.out_ae:
        save_ae(args.out_ae, ae, regime=args.regime, updated_from=args.ae)
        print(f"updated autoencoder -> {args.out_ae}")
    print(
        f"trained similarity net ({args.regime}) for {history.stopped_epoch} "
        f"epochs, val CE {history.val_loss[-1]:.6f} -> {args.out}"
    )
    return 0


def cmd_agent(args) -> int:
    serve(load_ae(args.ae), load_sim(args.sim))
    return 0


def cmd_probe(args) -> int:
    result = probe_reconstructions(load_ae(args.ae), load_corpus(args.data),
                                   args.limit)
    print(
        f"{result.within_one}/{result.probed} reconstructions keep the "
        f"glyph count within one component ({result.fraction:.1%})"
    )
    return 0


def _add_train_args(parser, default_epochs):
    parser.add_argument("--epochs", type=int, default=default_epochs)
    parser.add_argument("--patience", type=int, default=10)
    parser.add_argument("--val-size", type=int, default=500)
    parser.add_argument("--batch-size", type=int, default=64)
    parser.add_argument("--seed", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shapegame-baselines",
                                     description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    pre = sub.add_parser("pretrain", help="reconstruction-pretrain an autoencoder")
    pre.add_argument("--data", required=True, help="corpus directory")
    pre.add_argument("--out", required=True)
    pre.add_argument("--arch", choices=ARCHITECTURES, default="shallow")
    pre.add_argument("--length", type=int, default=8)
    pre.add_argument("--vocab", type=int, default=8)
    pre.add_argument("--tau", type=float, default=0.5)
    pre.add_argument("--decoder-width", type=int, default=128)
    pre.add_argument("--warmup", type=int, default=5)
    _add_train_args(pre, default_epochs=100)
    pre.set_defaults(func=cmd_pretrain)

    simp = sub.add_parser("train-sim", help="train the 4-way similarity network")
    simp.add_argument("--ae", required=True)
    simp.add_argument("--data", required=True, help="question-set directory")
    simp.add_argument("--out", required=True)
    simp.add_argument("--out-ae", help="where to save the updated autoencoder "
                                       "after an unfrozen run")
    simp.add_argument("--regime", choices=["frozen", "unfrozen"], default="frozen")
    simp.add_argument("--aux-recon", action="store_true",
                      help="keep the reconstruction loss during unfrozen training")
    _add_train_args(simp, default_epochs=100)
    simp.set_defaults(func=cmd_train_sim)

    agent = sub.add_parser("agent", help="serve the trained pair as a stdio agent")
    agent.add_argument("--ae", required=True)
    agent.add_argument("--sim", required=True)
    agent.set_defaults(func=cmd_agent)

    probe = sub.add_parser("probe", help="connected-component reconstruction probe")
    probe.add_argument("--ae", required=True)
    probe.add_argument("--data", required=True, help="corpus directory")
    probe.add_argument("--limit", type=int, default=200)
    probe.set_defaults(func=cmd_probe)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        print(f"error: missing file: {exc.filename}", file=sys.stderr)
        return 1
    except Exception as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
