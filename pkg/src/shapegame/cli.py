"""Command line interface.

    shapegame gen --out data --seed 7            build question datasets
    shapegame render "B12*12" --out grid.pgm     rasterize one program
    shapegame play --dataset data --speaker oracle --listener random --out run
    shapegame score run/records-test.jsonl --out results.csv
    shapegame serve --port 8080                  two-player session service

Exit codes: 0 on success, 2 on usage errors, 1 on runtime failures.
"""

from __future__ import annotations

import argparse
import os
import random
import sys
from pathlib import Path

from . import results as results_mod
from .agents import OracleListener, OracleSpeaker, RandomListener, RandomSpeaker, answer_key
from .config import DEFAULT_PORT, PORT_ENV_VAR, apply_preset, dump_config, load_config
from .engine import AgentEndpoints, Phase, run_phase, score
from .generate import PhaseSpec, build_phase_set, sample_corpus
from .imgio import write_pgm, write_png
from .lang import ParseError
from .manifest import (
    load_questions,
    read_manifest,
    read_records,
    write_corpus,
    write_manifest,
    write_records,
)
from .render import LayoutCapacityError, render
from .subproc import AgentProcess, SubprocessListener, SubprocessSpeaker, _ImageStore


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return 1


def cmd_gen(args) -> int:
    config = load_config(args.config)
    if args.preset in ("model", "human"):
        config = apply_preset(config, args.preset)
    out = Path(args.out)
    if args.preset == "desk":
        vocab = config.vocabs[Phase.PRECONDITIONING]
        corpus = sample_corpus(vocab, args.corpus_size, args.seed,
                               config.model, config.render)
        write_corpus(corpus, out / "corpus", args.seed)
        for name, count, seed in (
            ("train", args.train_questions, args.seed),
            ("eval", args.eval_questions, args.seed + 1),
        ):
            spec = PhaseSpec(Phase.PRECONDITIONING, vocab, vocab, count, seed,
                             curriculum=False)
            write_manifest(
                build_phase_set(spec, config.model, config.render), out / name, spec
            )
        print(f"wrote corpus + train/eval question sets under {out}")
        return 0
    for phase, count in (
        (Phase.PRACTICE, config.practice_questions),
        (Phase.TEST, config.test_questions),
    ):
        spec = PhaseSpec(
            phase, config.vocabs[phase], config.reference_for(phase), count,
            args.seed, config.curriculum,
        )
        questions = build_phase_set(spec, config.model, config.render)
        write_manifest(questions, out / phase.value, spec)
    if args.corpus_size:
        corpus = sample_corpus(
            config.vocabs[Phase.PRECONDITIONING], args.corpus_size, args.seed,
            config.model, config.render,
        )
        write_corpus(corpus, out / "corpus", args.seed)
    print(f"wrote practice/test manifests under {out}")
    return 0


def cmd_render(args) -> int:
    config = load_config(args.config)
    try:
        image = render(args.program, config.render)
    except (ParseError, LayoutCapacityError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    out = Path(args.out)
    fmt = args.format or ("png" if out.suffix.lower() == ".png" else "pgm")
    out.parent.mkdir(parents=True, exist_ok=True)
    if fmt == "png":
        write_png(image, out)
    else:
        write_pgm(image, out)
    print(f"wrote {out}")
    return 0


def _build_agents(args, questions, config):
    store = _ImageStore()
    processes = []

    def speaker_for(spec: str):
        if spec == "oracle":
            return OracleSpeaker(answer_key(questions))
        if spec == "random":
            return RandomSpeaker(random.Random(args.seed))
        if spec.startswith("cmd:"):
            proc = AgentProcess(spec[4:], timeout=config.agent_timeout)
            processes.append(proc)
            return SubprocessSpeaker(proc, store)
        raise ValueError(f"unknown speaker {spec!r}")

    def listener_for(spec: str):
        if spec == "oracle":
            return OracleListener(config.render)
        if spec == "random":
            return RandomListener(random.Random(args.seed + 1))
        if spec.startswith("cmd:"):
            proc = AgentProcess(spec[4:], timeout=config.agent_timeout)
            processes.append(proc)
            return SubprocessListener(proc, store)
        raise ValueError(f"unknown listener {spec!r}")

    agents = AgentEndpoints(speaker_for(args.speaker), listener_for(args.listener))
    return agents, processes


def cmd_play(args) -> int:
    config = load_config(args.config)
    dataset = Path(args.dataset)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    phases = []
    if (dataset / "manifest.jsonl").exists():
        manifest = read_manifest(dataset)
        questions = load_questions(manifest)
        phases.append((Phase(manifest.header["phase"]), questions))
    else:
        for phase in (Phase.PRACTICE, Phase.TEST):
            directory = dataset / phase.value
            if directory.exists():
                phases.append((phase, load_questions(read_manifest(directory))))
    if not phases:
        return _fail(f"no manifest under {dataset} (or practice/, test/)")
    all_questions = [q for _, qs in phases for q in qs]
    try:
        agents, processes = _build_agents(args, all_questions, config)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    rows = []
    try:
        for phase, questions in phases:
            records = run_phase(agents, questions, phase)
            write_records(records, out / f"records-{phase.value}.jsonl")
            rows.append((phase.value, score(records)))
    finally:
        for proc in processes:
            proc.close()
    table = results_mod.build_table(rows)
    results_mod.write_results(table, out / "results.csv")
    for label, breakdown in rows:
        print(f"{label}: {breakdown.overall.correct}/{breakdown.overall.total}")
    print(f"wrote {out / 'results.csv'}")
    return 0


def cmd_score(args) -> int:
    rows = []
    by_phase: dict[str, list[float]] = {}
    for path in args.records:
        records = read_records(path)
        label = args.label or Path(path).stem
        groups: dict[str, list] = {}
        for record in records:
            groups.setdefault(record.phase.value, []).append(record)
        for phase_name, group in groups.items():
            breakdown = score(group)
            rows.append((f"{label}/{phase_name}", breakdown))
            by_phase.setdefault(phase_name, []).append(float(breakdown.overall.correct))
    pair_scores = []
    if args.aggregate:
        for phase_name, scores in sorted(by_phase.items()):
            if len(scores) >= 2:
                pair_scores.append((f"{phase_name} (n={len(scores)})", scores))
    table = results_mod.build_table(rows, pair_scores)
    text = results_mod.render_results(table)
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
        print(f"wrote {args.out}")
    else:
        print(text, end="")
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    config = load_config(args.config)
    port = args.port or int(os.environ.get(PORT_ENV_VAR, DEFAULT_PORT))
    app = create_app(config, frontend_dir=args.frontend)
    uvicorn.run(app, host=args.host, port=port, log_level="warning")
    return 0


def cmd_config(args) -> int:
    print(dump_config(load_config(args.config)), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="shapegame", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", help="generate question datasets")
    gen.add_argument("--out", required=True)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--config")
    gen.add_argument("--preset", choices=["model", "human", "desk"])
    gen.add_argument("--corpus-size", type=int, default=0,
                     help="also emit a preconditioning image corpus")
    gen.add_argument("--train-questions", type=int, default=2000)
    gen.add_argument("--eval-questions", type=int, default=500)
    gen.set_defaults(func=cmd_gen)

    rend = sub.add_parser("render", help="rasterize one program")
    rend.add_argument("program")
    rend.add_argument("--out", required=True)
    rend.add_argument("--format", choices=["pgm", "png"])
    rend.add_argument("--config")
    rend.set_defaults(func=cmd_render)

    play = sub.add_parser("play", help="run practice and test phases")
    play.add_argument("--dataset", required=True)
    play.add_argument("--out", required=True)
    play.add_argument("--speaker", default="oracle",
                      help="oracle | random | cmd:<command line>")
    play.add_argument("--listener", default="oracle")
    play.add_argument("--seed", type=int, default=0)
    play.add_argument("--config")
    play.set_defaults(func=cmd_play)

    sc = sub.add_parser("score", help="score records files into a results table")
    sc.add_argument("records", nargs="+")
    sc.add_argument("--out")
    sc.add_argument("--label")
    sc.add_argument("--aggregate", action="store_true",
                    help="append mean/stdev rows over multiple records files")
    sc.set_defaults(func=cmd_score)

    serve = sub.add_parser("serve", help="start the two-player session service")
    serve.add_argument("--host", default="127.0.0.1")
    serve.add_argument("--port", type=int, default=0)
    serve.add_argument("--config")
    serve.add_argument("--frontend", help="directory of static files to mount at /")
    serve.set_defaults(func=cmd_serve)

    cfg = sub.add_parser("config", help="print the effective configuration")
    cfg.add_argument("--config")
    cfg.set_defaults(func=cmd_config)
    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except FileNotFoundError as exc:
        return _fail(f"missing file: {exc.filename}")
    except Exception as exc:  # one-line diagnostics, no tracebacks
        return _fail(str(exc))


if __name__ == "__main__":
    sys.exit(main())
