"""Command-line surface: validate, encode, decode, stats, split, prompt, run,
compare."""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .dataset import (
    corpus_stats,
    filter_max_characters,
    kfold_cross_series,
    leave_one_series_out,
    load_corpus,
)
from .evaluation import format_report_table
from .pipeline import (
    RunManifest,
    compare_runs,
    format_comparison,
    run_pipeline,
)
from .prompts import PromptConfig, build_prompt
from .serialization import (
    LayoutPolicy,
    NullPrediction,
    OrderPolicy,
    Strategy,
    decode,
    encode,
)

STRATEGY_FLAGS = {
    "baseline": Strategy.BASELINE,
    "comma": Strategy.COMMA,
    "marker": Strategy.MARKER,
    "no-semantics": Strategy.NO_SEMANTICS,
}
ORDER_FLAGS = {
    "as-given": OrderPolicy.AS_GIVEN,
    "group-first": OrderPolicy.GROUP_FIRST,
    "individual-first": OrderPolicy.INDIVIDUAL_FIRST,
}
LAYOUT_FLAGS = {
    "chars-first": LayoutPolicy.CHARACTERS_THEN_EMOTIONS,
    "emotions-first": LayoutPolicy.EMOTIONS_FIRST,
}


def _load_or_die(path: str, require_clean: bool = False) -> tuple:
    corpus, errors = load_corpus(path)
    if errors:
        for error in errors:
            print(f"error: {error}", file=sys.stderr)
        if require_clean:
            sys.exit(1)
    return corpus, errors


def cmd_validate(args) -> int:
    corpus, errors = load_corpus(args.corpus)
    for error in errors:
        print(f"error: {error}", file=sys.stderr)
    if not len(corpus) and not errors:
        print("warning: corpus is empty", file=sys.stderr)
    print(f"{len(corpus)} valid records, {len(errors)} errors")
    return 1 if errors else 0


def cmd_encode(args) -> int:
    corpus, _ = _load_or_die(args.corpus, require_clean=True)
    if args.max_chars is not None:
        corpus = filter_max_characters(corpus, args.max_chars)
    lines = []
    for record in corpus:
        if record.annotation is None:
            continue
        target = encode(
            record.annotation,
            STRATEGY_FLAGS[args.strategy],
            ORDER_FLAGS[args.order],
            LAYOUT_FLAGS[args.layout],
        )
        lines.append(json.dumps(
            {"id": record.id, "source": record.text, "target": target}, ensure_ascii=False
        ))
    _write_lines(args.output, lines)
    return 0


def cmd_decode(args) -> int:
    lines = []
    failures = 0
    for line in Path(args.generations).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        payload = json.loads(line)
        text = payload.get("text", payload.get("target", ""))
        outcome = decode(text, STRATEGY_FLAGS[args.strategy])
        entry: dict = {"id": payload.get("id")}
        if isinstance(outcome, NullPrediction):
            entry["null_reason"] = outcome.reason
            failures += 1
        else:
            entry["characters"] = [str(c) for c in outcome.characters]
            entry["emotions"] = [
                {"who": e.who if isinstance(e.who, str) else str(e.who), "emotion": e.emotion.value}
                for e in outcome.emotions
            ]
        lines.append(json.dumps(entry, ensure_ascii=False))
    _write_lines(args.output, lines)
    print(f"decoded {len(lines)} generations, {failures} null", file=sys.stderr)
    return 0


def cmd_stats(args) -> int:
    corpus, _ = _load_or_die(args.corpus)
    if args.max_chars is not None:
        corpus = filter_max_characters(corpus, args.max_chars)
    stats = corpus_stats(corpus)
    print(json.dumps(stats.to_dict(), indent=2, ensure_ascii=False))
    return 0


def cmd_split(args) -> int:
    corpus, _ = _load_or_die(args.corpus, require_clean=True)
    if args.max_chars is not None:
        corpus = filter_max_characters(corpus, args.max_chars)
    if args.kind == "loso":
        plan = leave_one_series_out(corpus)
    else:
        plan = kfold_cross_series(corpus, 5, args.seed)
    text = json.dumps(plan.to_dict(), indent=2, ensure_ascii=False) + "\n"
    if args.output:
        Path(args.output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return 0


def cmd_prompt(args) -> int:
    corpus, _ = _load_or_die(args.corpus, require_clean=True)
    prompt = build_prompt(PromptConfig(args.target_id, args.k_shot, args.seed), corpus)
    if args.output:
        Path(args.output).write_text(prompt, encoding="utf-8")
    else:
        sys.stdout.write(prompt)
    return 0


def cmd_run(args) -> int:
    if args.manifest:
        manifest = RunManifest.from_dict(
            json.loads(Path(args.manifest).read_text(encoding="utf-8"))
        )
    else:
        manifest = RunManifest(
            corpus=args.corpus,
            backend=args.backend,
            strategy=STRATEGY_FLAGS[args.strategy].value,
            order=ORDER_FLAGS[args.order].value,
            layout=LAYOUT_FLAGS[args.layout].value,
            split=args.split,
            seed=args.seed,
            max_chars=args.max_chars,
            anonymize=args.anonymize,
            spans=args.spans,
            k_shot=args.k_shot,
            fold=args.fold,
            timeout=args.timeout,
            outdir=args.outdir,
        )
    corpus, _ = _load_or_die(manifest.corpus, require_clean=True)
    result = run_pipeline(manifest, corpus)
    rows = [(s.series, s.report) for s in result.series_reports] + [("macro", result.macro)]
    print(format_report_table(rows))
    print(f"summary: {json.dumps(result.summary)}")
    return 0


def cmd_compare(args) -> int:
    comparison = compare_runs(args.run_a, args.run_b, per_narrative=args.per_narrative)
    if args.json:
        print(json.dumps(comparison, indent=2))
    else:
        print(format_comparison(comparison))
    return 0


def _write_lines(output: str | None, lines: list[str]) -> None:
    text = "\n".join(lines) + ("\n" if lines else "")
    if output:
        Path(output).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _add_strategy_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--strategy", choices=sorted(STRATEGY_FLAGS), default="baseline")
    parser.add_argument("--order", choices=sorted(ORDER_FLAGS), default="as-given")
    parser.add_argument("--layout", choices=sorted(LAYOUT_FLAGS), default="chars-first")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dreamcode",
        description="Character and emotion coding of dream narratives: "
        "codec, evaluation and model-pipeline tooling.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check a corpus file against the record schema")
    p.add_argument("corpus")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("encode", help="render gold annotations as target text pairs")
    p.add_argument("corpus")
    p.add_argument("-o", "--output", default=None)
    _add_strategy_flags(p)
    p.add_argument("--max-chars", type=int, default=None)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("decode", help="strictly decode generated target texts")
    p.add_argument("generations", help="JSONL with id and text fields")
    p.add_argument("-o", "--output", default=None)
    p.add_argument("--strategy", choices=sorted(STRATEGY_FLAGS), default="baseline")
    p.set_defaults(func=cmd_decode)

    p = sub.add_parser("stats", help="corpus statistics and distributions")
    p.add_argument("corpus")
    p.add_argument("--max-chars", type=int, default=None)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("split", help="write a leave-one-series-out or 5-fold plan")
    p.add_argument("corpus")
    p.add_argument("--kind", choices=("loso", "kfold5"), default="loso")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-chars", type=int, default=None)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_split)

    p = sub.add_parser("prompt", help="build a few-shot character prompt")
    p.add_argument("corpus")
    p.add_argument("--target-id", required=True)
    p.add_argument("--k-shot", type=int, default=0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("run", help="generate, decode and score a whole split")
    p.add_argument("corpus", nargs="?", default=None)
    p.add_argument("--manifest", default=None, help="re-run a saved manifest.json")
    p.add_argument("--backend", default="mock:echo-gold", help="mock:NAME, pipe:CMD or http:URL")
    _add_strategy_flags(p)
    p.add_argument("--split", choices=("loso", "kfold5"), default="loso")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--max-chars", type=int, default=None)
    p.add_argument("--anonymize", action="store_true")
    p.add_argument("--spans", default=None, help="JSONL sidecar with per-id entity spans")
    p.add_argument("--k-shot", type=int, default=0)
    p.add_argument("--fold", default=None, help="run a single fold by name")
    p.add_argument("--timeout", type=float, default=60.0, help="per-request seconds")
    p.add_argument("--outdir", default="run")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("compare", help="Wilcoxon significance table between two runs")
    p.add_argument("run_a")
    p.add_argument("run_b")
    p.add_argument("--per-narrative", action="store_true")
    p.add_argument("--json", action="store_true")
    p.set_defaults(func=cmd_compare)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "run" and not args.manifest and not args.corpus:
        parser.error("run needs a corpus path or --manifest")
    if args.command == "run" and getattr(args, "anonymize", False) and not args.spans and not args.manifest:
        parser.error("--anonymize needs a --spans sidecar file")
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
