"""Multiset precision/recall/F1 over six dimensions, and paired significance.

A character prediction is correct only when all four classes match, so the
"character" dimension intersects full 4-symbol codes as multisets.  The four
subclass dimensions are independent projections of the same characters onto
one class each.  The "emotion" dimension intersects (experiencer, emotion)
pairs, the experiencer keyed by its 4-symbol code or "D" for the dreamer.

A failed decode (:class:`NullPrediction` or ``None``) scores as an empty
prediction.  Counts add associatively, so narratives can be scored in any
order or in parallel and merged.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, fields
from typing import Iterable, Mapping, Optional, Sequence, Union

from .codes import AnnotationSet, DREAMER
from .serialization import NullPrediction

DIMENSIONS = ("status", "gender", "identity", "age", "character", "emotion")


@dataclass(frozen=True)
class CountTriple:
    matched: int = 0
    predicted: int = 0
    gold: int = 0

    def __add__(self, other: "CountTriple") -> "CountTriple":
        return CountTriple(
            self.matched + other.matched,
            self.predicted + other.predicted,
            self.gold + other.gold,
        )


@dataclass(frozen=True)
class MatchCounts:
    """Matched/predicted/gold tallies, one triple per dimension."""

    status: CountTriple = CountTriple()
    gender: CountTriple = CountTriple()
    identity: CountTriple = CountTriple()
    age: CountTriple = CountTriple()
    character: CountTriple = CountTriple()
    emotion: CountTriple = CountTriple()

    def __add__(self, other: "MatchCounts") -> "MatchCounts":
        return MatchCounts(
            **{f.name: getattr(self, f.name) + getattr(other, f.name) for f in fields(self)}
        )

    def get(self, dimension: str) -> CountTriple:
        return getattr(self, dimension)

    def as_dict(self) -> dict[str, tuple[int, int, int]]:
        return {
            d: (self.get(d).matched, self.get(d).predicted, self.get(d).gold)
            for d in DIMENSIONS
        }


def _multiset_counts(pred: Counter, gold: Counter) -> CountTriple:
    matched = sum((pred & gold).values())
    return CountTriple(matched, sum(pred.values()), sum(gold.values()))


def _experiencer_key(who) -> str:
    return DREAMER if who == DREAMER else str(who)


def score_narrative(
    pred: Union[AnnotationSet, NullPrediction, None], gold: AnnotationSet
) -> MatchCounts:
    """Score one prediction against one gold annotation."""
    if isinstance(pred, AnnotationSet):
        pred_chars = list(pred.characters)
        pred_emotions = [(_experiencer_key(e.who), e.emotion.value) for e in pred.emotions]
    else:
        pred_chars = []
        pred_emotions = []
    gold_chars = list(gold.characters)
    gold_emotions = [(_experiencer_key(e.who), e.emotion.value) for e in gold.emotions]

    def project(attribute: str) -> CountTriple:
        return _multiset_counts(
            Counter(getattr(c, attribute).value for c in pred_chars),
            Counter(getattr(c, attribute).value for c in gold_chars),
        )

    return MatchCounts(
        status=project("status"),
        gender=project("gender"),
        identity=project("identity"),
        age=project("age"),
        character=_multiset_counts(
            Counter(str(c) for c in pred_chars), Counter(str(c) for c in gold_chars)
        ),
        emotion=_multiset_counts(Counter(pred_emotions), Counter(gold_emotions)),
    )


@dataclass(frozen=True)
class DimensionMetrics:
    precision: float
    recall: float
    f1: float
    # Degenerate denominators: precision (resp. recall) is defined as 0 when
    # nothing was predicted (resp. no gold exists) for the dimension.
    zero_predicted: bool = False
    zero_gold: bool = False

    @classmethod
    def from_triple(cls, triple: CountTriple) -> "DimensionMetrics":
        precision = triple.matched / triple.predicted if triple.predicted else 0.0
        recall = triple.matched / triple.gold if triple.gold else 0.0
        f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
        return cls(precision, recall, f1, triple.predicted == 0, triple.gold == 0)


@dataclass(frozen=True)
class MetricReport:
    """Per-dimension metrics; ``counts`` present for micro reports, absent for
    macro averages."""

    dimensions: Mapping[str, DimensionMetrics]
    counts: Optional[MatchCounts] = None

    def f1(self, dimension: str) -> float:
        return self.dimensions[dimension].f1

    def to_dict(self) -> dict:
        payload: dict = {
            "metrics": {
                d: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "zero_predicted": m.zero_predicted,
                    "zero_gold": m.zero_gold,
                }
                for d, m in self.dimensions.items()
            }
        }
        if self.counts is not None:
            payload["counts"] = {
                d: {"matched": t.matched, "predicted": t.predicted, "gold": t.gold}
                for d, t in ((d, self.counts.get(d)) for d in DIMENSIONS)
            }
        return payload


@dataclass(frozen=True)
class SeriesReport:
    series: str
    report: MetricReport


def report_from_counts(counts: MatchCounts) -> MetricReport:
    return MetricReport(
        {d: DimensionMetrics.from_triple(counts.get(d)) for d in DIMENSIONS}, counts
    )


def aggregate_micro(counts: Iterable[MatchCounts]) -> MetricReport:
    """Sum matched/predicted/gold across narratives, then derive P/R/F1."""
    total = MatchCounts()
    for c in counts:
        total = total + c
    return report_from_counts(total)


def macro_average(reports: Sequence[SeriesReport]) -> MetricReport:
    """Arithmetic mean of each metric across series reports."""
    if not reports:
        raise ValueError("cannot macro-average zero reports")
    merged = {}
    for dimension in DIMENSIONS:
        per_series = [r.report.dimensions[dimension] for r in reports]
        merged[dimension] = DimensionMetrics(
            precision=sum(m.precision for m in per_series) / len(per_series),
            recall=sum(m.recall for m in per_series) / len(per_series),
            f1=sum(m.f1 for m in per_series) / len(per_series),
            zero_predicted=all(m.zero_predicted for m in per_series),
            zero_gold=all(m.zero_gold for m in per_series),
        )
    return MetricReport(merged)


def format_report_table(rows: Sequence[tuple[str, MetricReport]]) -> str:
    """Human table of F1 x 100 (2 decimals), dimensions in the fixed column
    order status, gender, identity, age, character, emotion."""
    header = ["model"] + list(DIMENSIONS)
    body = [
        [name] + [f"{report.f1(d) * 100:.2f}" for d in DIMENSIONS] for name, report in rows
    ]
    widths = [max(len(line[i]) for line in [header] + body) for i in range(len(header))]
    lines = []
    for line in [header] + body:
        lines.append("  ".join(cell.ljust(w) for cell, w in zip(line, widths)).rstrip())
    return "\n".join(lines)


class AllZeroDifferences(ValueError):
    """Every paired difference is zero; the signed-rank test is undefined."""


@dataclass(frozen=True)
class WilcoxonResult:
    statistic: float  # sum of ranks of positive differences (W+)
    n: int  # pairs remaining after dropping zero differences
    p_value: float  # two-sided


def _average_ranks(magnitudes: Sequence[float]) -> list[float]:
    order = sorted(range(len(magnitudes)), key=lambda i: magnitudes[i])
    ranks = [0.0] * len(magnitudes)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and magnitudes[order[j + 1]] == magnitudes[order[i]]:
            j += 1
        shared = (i + j) / 2 + 1  # ranks are 1-based
        for k in range(i, j + 1):
            ranks[order[k]] = shared
        i = j + 1
    return ranks


def _exact_two_sided(doubled_ranks: Sequence[int], doubled_statistic: int) -> float:
    # Distribution of 2*W+ over all equally likely sign assignments, as the
    # subset-sum polynomial of the doubled ranks.
    total = sum(doubled_ranks)
    table = [0] * (total + 1)
    table[0] = 1
    for r in doubled_ranks:
        for s in range(total, r - 1, -1):
            table[s] += table[s - r]
    lower = sum(table[: doubled_statistic + 1])
    upper = sum(table[doubled_statistic:])
    assignments = 2 ** len(doubled_ranks)
    return min(1.0, 2 * min(lower, upper) / assignments)


def _approx_two_sided(ranks: Sequence[float], statistic: float) -> float:
    n = len(ranks)
    mean = n * (n + 1) / 4
    tie_counts = Counter(ranks).values()
    variance = n * (n + 1) * (2 * n + 1) / 24 - sum(t**3 - t for t in tie_counts) / 48
    if variance <= 0:
        raise AllZeroDifferences("all differences are tied at one magnitude")
    delta = statistic - mean
    correction = 0.5 if delta > 0 else -0.5 if delta < 0 else 0.0
    z = (delta - correction) / math.sqrt(variance)
    return min(1.0, math.erfc(abs(z) / math.sqrt(2)))


def wilcoxon_signed_rank(a: Sequence[float], b: Sequence[float]) -> WilcoxonResult:
    """Two-sided Wilcoxon signed-rank test for paired samples.

    Zero differences are dropped before ranking; tied magnitudes share average
    ranks.  The p-value is exact (all sign assignments enumerated) up to 25
    remaining pairs and normal-approximated beyond.  Raises
    :class:`AllZeroDifferences` when no nonzero difference remains.
    """
    if len(a) != len(b):
        raise ValueError(f"paired samples differ in length: {len(a)} vs {len(b)}")
    differences = [x - y for x, y in zip(a, b) if x != y]
    if not differences:
        raise AllZeroDifferences("all paired differences are zero")
    magnitudes = [abs(d) for d in differences]
    ranks = _average_ranks(magnitudes)
    statistic = sum(r for r, d in zip(ranks, differences) if d > 0)
    n = len(differences)
    if n <= 25:
        doubled = [round(2 * r) for r in ranks]
        p_value = _exact_two_sided(doubled, round(2 * statistic))
    else:
        p_value = _approx_two_sided(ranks, statistic)
    return WilcoxonResult(statistic, n, p_value)


def significance_stars(p_value: float) -> str:
    """"**" below 0.05, "*" below 0.1, otherwise empty."""
    if p_value < 0.05:
        return "**"
    if p_value < 0.1:
        return "*"
    return ""
