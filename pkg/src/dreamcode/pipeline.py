"""End-to-end evaluation runs: split, generate, decode, score, report.

A run is described by a :class:`RunManifest` and produces, inside its output
directory:

* ``manifest.json``  - the manifest itself;
* ``predictions.jsonl`` - a manifest header line, then one record per scored
  narrative (generation text, decoded annotation or null reason, counts);
* ``report.json`` - the manifest, per-fold micro reports, the macro average
  and a run summary.

Everything is deterministically ordered (folds in plan order, narratives by
id), so re-running the same manifest against a deterministic backend yields
byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field
from pathlib import Path
from typing import Optional

from .backends import GenerationTimeout, TransportError, make_backend
from .codes import AnnotationSet, DREAMER
from .dataset import (
    Corpus,
    EntitySpan,
    NarrativeRecord,
    SplitPlan,
    anonymize_names,
    filter_max_characters,
    kfold_cross_series,
    leave_one_series_out,
)
from .evaluation import (
    AllZeroDifferences,
    CountTriple,
    DimensionMetrics,
    DIMENSIONS,
    MatchCounts,
    MetricReport,
    SeriesReport,
    aggregate_micro,
    macro_average,
    report_from_counts,
    score_narrative,
    significance_stars,
    wilcoxon_signed_rank,
)
from .prompts import PromptConfig, build_prompt, parse_assistant_output, render_character_line
from .serialization import (
    LayoutPolicy,
    NullPrediction,
    OrderPolicy,
    Strategy,
    decode,
    encode,
)

NULL_REASON_TIMEOUT = "backend-timeout"
NULL_REASON_TRANSPORT = "transport-error"


@dataclass(frozen=True)
class RunManifest:
    corpus: str
    backend: str
    strategy: str = Strategy.BASELINE.value
    order: str = OrderPolicy.AS_GIVEN.value
    layout: str = LayoutPolicy.CHARACTERS_THEN_EMOTIONS.value
    split: str = "loso"  # "loso" | "kfold5"
    seed: int = 0
    max_chars: Optional[int] = None
    anonymize: bool = False
    spans: Optional[str] = None
    k_shot: int = 0
    fold: Optional[str] = None  # restrict to one fold by name
    timeout: Optional[float] = 60.0  # per-request generation timeout, seconds
    outdir: str = "run"

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "RunManifest":
        known = {f for f in cls.__dataclass_fields__}
        return cls(**{k: v for k, v in payload.items() if k in known})


@dataclass
class RunResult:
    manifest: RunManifest
    series_reports: list[SeriesReport]
    macro: MetricReport
    summary: dict = field(default_factory=dict)


def _fold_names(plan: SplitPlan, corpus: Corpus) -> list[str]:
    if plan.kind == "loso":
        by_id = {r.id: r for r in corpus}
        return [by_id[f.eval[0]].series if f.eval else f"fold-{i}" for i, f in enumerate(plan.folds)]
    return [f"fold-{i}" for i in range(len(plan.folds))]


def make_plan(manifest: RunManifest, corpus: Corpus) -> SplitPlan:
    if manifest.split == "loso":
        return leave_one_series_out(corpus)
    if manifest.split == "kfold5":
        return kfold_cross_series(corpus, 5, manifest.seed)
    raise ValueError(f"unknown split kind {manifest.split!r}; expected loso or kfold5")


def load_spans_file(path: str) -> dict[str, list[EntitySpan]]:
    spans: dict[str, list[EntitySpan]] = {}
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        line = line.strip()
        if not line:
            continue
        payload = json.loads(line)
        spans[payload["id"]] = [
            EntitySpan(s["start"], s["end"], s.get("surface", "")) for s in payload["spans"]
        ]
    return spans


def gold_target_text(record: NarrativeRecord, manifest: RunManifest) -> str:
    """What a perfect backend would answer for this narrative under the
    manifest's configuration."""
    assert record.annotation is not None
    if manifest.k_shot > 0:
        return "CHARACTERS: " + render_character_line(record.annotation.characters)
    return encode(
        record.annotation,
        Strategy(manifest.strategy),
        OrderPolicy(manifest.order),
        LayoutPolicy(manifest.layout),
    )


def _decode_generation(text: str, manifest: RunManifest):
    if manifest.k_shot > 0:
        outcome = parse_assistant_output(text)
        if isinstance(outcome, NullPrediction):
            return outcome
        return AnnotationSet(tuple(outcome), ())
    return decode(text, Strategy(manifest.strategy))


def _annotation_payload(annotation: AnnotationSet) -> dict:
    return {
        "characters": [str(c) for c in annotation.characters],
        "emotions": [
            {"who": DREAMER if e.who == DREAMER else str(e.who), "emotion": e.emotion.value}
            for e in annotation.emotions
        ],
    }


def run_pipeline(manifest: RunManifest, corpus: Corpus) -> RunResult:
    """Evaluate every fold of the manifest's split against its backend and
    write predictions and reports under ``manifest.outdir``."""
    if manifest.max_chars is not None:
        corpus = filter_max_characters(corpus, manifest.max_chars)
    plan = make_plan(manifest, corpus)
    names = _fold_names(plan, corpus)
    if manifest.fold is not None:
        keep = [i for i, n in enumerate(names) if n == manifest.fold]
        if not keep:
            raise ValueError(f"no fold named {manifest.fold!r}; have {names}")
        plan = SplitPlan(plan.kind, tuple(plan.folds[i] for i in keep), plan.seed)
        names = [names[i] for i in keep]

    spans = load_spans_file(manifest.spans) if manifest.anonymize and manifest.spans else {}
    by_id = {r.id: r for r in corpus}
    eval_records = [
        by_id[i] for f in plan.folds for i in f.eval if by_id[i].annotation is not None
    ]
    gold_targets = {r.id: gold_target_text(r, manifest) for r in eval_records}

    backend = make_backend(manifest.backend, gold_targets=gold_targets, timeout=manifest.timeout)
    predictions: list[dict] = []
    fold_counts: list[list[MatchCounts]] = []
    summary = {
        "narratives": 0,
        "null_predictions": 0,
        "timeouts": 0,
        "transport_errors": 0,
        "skipped_unannotated": 0,
    }
    try:
        for fold, name in zip(plan.folds, names):
            counts_here: list[MatchCounts] = []
            for record_id in sorted(fold.eval):
                record = by_id[record_id]
                if record.annotation is None:
                    summary["skipped_unannotated"] += 1
                    continue
                if manifest.k_shot > 0:
                    model_input = build_prompt(
                        PromptConfig(record.id, manifest.k_shot, manifest.seed), corpus
                    )
                else:
                    model_input = record.text
                    if manifest.anonymize:
                        model_input = anonymize_names(model_input, spans.get(record.id, []))
                output_text = None
                try:
                    output_text = backend.generate(record.id, model_input)
                    outcome = _decode_generation(output_text, manifest)
                except GenerationTimeout:
                    outcome = NullPrediction(NULL_REASON_TIMEOUT)
                    summary["timeouts"] += 1
                except TransportError:
                    outcome = NullPrediction(NULL_REASON_TRANSPORT)
                    summary["transport_errors"] += 1
                counts = score_narrative(outcome, record.annotation)
                counts_here.append(counts)
                summary["narratives"] += 1
                entry = {
                    "id": record.id,
                    "series": record.series,
                    "fold": name,
                    "output": output_text,
                }
                if isinstance(outcome, NullPrediction):
                    entry["prediction"] = None
                    entry["null_reason"] = outcome.reason
                    summary["null_predictions"] += 1
                else:
                    entry["prediction"] = _annotation_payload(outcome)
                entry["counts"] = counts.as_dict()
                predictions.append(entry)
            fold_counts.append(counts_here)
    finally:
        backend.close()

    series_reports = [
        SeriesReport(name, aggregate_micro(counts))
        for name, counts in zip(names, fold_counts)
    ]
    macro = macro_average(series_reports) if series_reports else report_from_counts(MatchCounts())
    result = RunResult(manifest, series_reports, macro, summary)
    _write_run_files(result, predictions)
    return result


def _json_line(payload: dict) -> str:
    return json.dumps(payload, ensure_ascii=False)


def _write_run_files(result: RunResult, predictions: list[dict]) -> None:
    outdir = Path(result.manifest.outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    manifest_dict = result.manifest.to_dict()
    (outdir / "manifest.json").write_text(
        json.dumps(manifest_dict, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )
    lines = [_json_line({"manifest": manifest_dict})]
    lines += [_json_line(entry) for entry in predictions]
    (outdir / "predictions.jsonl").write_text("\n".join(lines) + "\n", encoding="utf-8")
    report = {
        "manifest": manifest_dict,
        "series": [
            {"series": s.series, **s.report.to_dict()} for s in result.series_reports
        ],
        "macro": result.macro.to_dict(),
        "summary": result.summary,
    }
    (outdir / "report.json").write_text(
        json.dumps(report, indent=2, ensure_ascii=False) + "\n", encoding="utf-8"
    )


def load_report(run_dir: str) -> dict:
    return json.loads((Path(run_dir) / "report.json").read_text(encoding="utf-8"))


def _per_series_f1(report: dict) -> dict[str, dict[str, float]]:
    return {
        entry["series"]: {d: entry["metrics"][d]["f1"] for d in DIMENSIONS}
        for entry in report["series"]
    }


def _per_narrative_f1(run_dir: str) -> dict[str, dict[str, float]]:
    scores: dict[str, dict[str, float]] = {}
    lines = (Path(run_dir) / "predictions.jsonl").read_text(encoding="utf-8").splitlines()
    for line in lines[1:]:
        entry = json.loads(line)
        per_dim = {}
        for d in DIMENSIONS:
            matched, predicted, gold = entry["counts"][d]
            per_dim[d] = DimensionMetrics.from_triple(CountTriple(matched, predicted, gold)).f1
        scores[entry["id"]] = per_dim
    return scores


def compare_runs(run_a: str, run_b: str, per_narrative: bool = False) -> dict:
    """Wilcoxon signed-rank comparison of two runs, per dimension, paired by
    fold (default) or by narrative id."""
    if per_narrative:
        a_scores = _per_narrative_f1(run_a)
        b_scores = _per_narrative_f1(run_b)
    else:
        a_scores = _per_series_f1(load_report(run_a))
        b_scores = _per_series_f1(load_report(run_b))
    if set(a_scores) != set(b_scores):
        raise ValueError("runs cover different units; cannot pair scores")
    keys = sorted(a_scores)
    table: dict[str, dict] = {}
    for dimension in DIMENSIONS:
        xs = [a_scores[k][dimension] for k in keys]
        ys = [b_scores[k][dimension] for k in keys]
        row: dict = {
            "mean_a": sum(xs) / len(xs) if xs else 0.0,
            "mean_b": sum(ys) / len(ys) if ys else 0.0,
        }
        try:
            outcome = wilcoxon_signed_rank(xs, ys)
            row["p_value"] = outcome.p_value
            row["stars"] = significance_stars(outcome.p_value)
        except AllZeroDifferences:
            row["p_value"] = None
            row["stars"] = ""
            row["note"] = "identical scores on every pair"
        table[dimension] = row
    return {"units": keys, "pairing": "narrative" if per_narrative else "series", "dimensions": table}


def format_comparison(comparison: dict) -> str:
    lines = [f"pairing: {comparison['pairing']} (n={len(comparison['units'])})"]
    header = f"{'dimension':<10} {'A':>7} {'B':>7} {'p-value':>9}  sig"
    lines.append(header)
    for dimension, row in comparison["dimensions"].items():
        p = row["p_value"]
        p_text = f"{p:.5f}" if p is not None else "n/a"
        lines.append(
            f"{dimension:<10} {row['mean_a'] * 100:>7.2f} {row['mean_b'] * 100:>7.2f} "
            f"{p_text:>9}  {row['stars']}"
        )
        if "note" in row:
            lines[-1] += f" ({row['note']})"
    return "\n".join(lines)
