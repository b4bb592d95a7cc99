from __future__ import annotations

import itertools
import random

import pytest

from dreamcode.codes import (
    AnnotationSet,
    DREAMER,
    EmotionLabel,
    EmotionRecord,
    parse_character_code,
)
from dreamcode.evaluation import (
    CountTriple,
    DIMENSIONS,
    DimensionMetrics,
    MatchCounts,
    SeriesReport,
    aggregate_micro,
    format_report_table,
    macro_average,
    report_from_counts,
    score_narrative,
)
from dreamcode.serialization import NullPrediction
from conftest import ALL_CODES, random_annotation


def codes(*texts):
    return tuple(parse_character_code(t) for t in texts)


def annotation(char_texts, emotion_pairs=()):
    emotions = tuple(
        EmotionRecord(DREAMER if who == "D" else parse_character_code(who), EmotionLabel(code))
        for who, code in emotion_pairs
    )
    return AnnotationSet(codes(*char_texts), emotions)


# The birthday-party narrative coding: two boyfriends (2MSC), one boyfriend
# (1MSC), the best friend (1FSC); the dreamer has apprehension.
PARTY_GOLD = annotation(["2MSC", "1MSC", "1FSC"], [("D", "AP")])


def oracle_alignment_matched(pred_keys, gold_keys):
    """Maximum number of equal pairs over all injective alignments, by
    exhaustive enumeration (permutations of the larger side)."""
    smaller, larger = sorted((list(pred_keys), list(gold_keys)), key=len)
    best = 0
    for chosen in itertools.permutations(range(len(larger)), len(smaller)):
        best = max(best, sum(1 for i, j in enumerate(chosen) if smaller[i] == larger[j]))
    return best


def test_character_multiset_example():
    counts = score_narrative(
        annotation(["1FKA", "1MSA", "1MSA"]), annotation(["1FKA", "1MSA"])
    )
    assert counts.character == CountTriple(2, 3, 2)
    metrics = report_from_counts(counts).dimensions["character"]
    assert metrics.precision == pytest.approx(2 / 3)
    assert metrics.recall == 1.0
    assert metrics.f1 == pytest.approx(0.8)


def test_null_prediction_scores_empty():
    counts = score_narrative(NullPrediction("unparseable-code"), PARTY_GOLD)
    for dim in DIMENSIONS:
        assert counts.get(dim).matched == 0
        assert counts.get(dim).predicted == 0
    assert counts.character.gold == 3
    assert counts.emotion.gold == 1
    assert score_narrative(None, PARTY_GOLD) == counts


def test_gold_against_itself_is_perfect():
    counts = score_narrative(PARTY_GOLD, PARTY_GOLD)
    report = report_from_counts(counts)
    for dim in DIMENSIONS:
        assert report.dimensions[dim].f1 == 1.0


def test_dreamer_emotion_pair():
    pred = annotation([], [("D", "AP")])
    counts = score_narrative(pred, annotation([], [("D", "AP")]))
    assert counts.emotion == CountTriple(1, 1, 1)
    assert report_from_counts(counts).dimensions["emotion"].f1 == 1.0


def test_emotion_requires_both_code_and_emotion_to_match():
    gold = annotation(["1FKA"], [("1FKA", "HA")])
    wrong_emotion = annotation(["1FKA"], [("1FKA", "AN")])
    wrong_character = annotation(["1FKA"], [("1MSA", "HA")])
    assert score_narrative(wrong_emotion, gold).emotion == CountTriple(0, 1, 1)
    assert score_narrative(wrong_character, gold).emotion == CountTriple(0, 1, 1)


def test_subclass_projections():
    # same gender/age but different identity: subclass dims partially match
    counts = score_narrative(annotation(["1FKA"]), annotation(["1FSA"]))
    assert counts.character == CountTriple(0, 1, 1)
    assert counts.status == CountTriple(1, 1, 1)
    assert counts.gender == CountTriple(1, 1, 1)
    assert counts.identity == CountTriple(0, 1, 1)
    assert counts.age == CountTriple(1, 1, 1)


def test_oracle_equivalence_on_random_pairs():
    rng = random.Random(4242)
    for _ in range(300):
        pred = random_annotation(rng)
        gold = random_annotation(rng)
        counts = score_narrative(pred, gold)
        assert counts.character.matched == oracle_alignment_matched(
            [str(c) for c in pred.characters], [str(c) for c in gold.characters]
        )
        pred_pairs = [(str(e.who) if e.who != DREAMER else "D", e.emotion.value) for e in pred.emotions]
        gold_pairs = [(str(e.who) if e.who != DREAMER else "D", e.emotion.value) for e in gold.emotions]
        assert counts.emotion.matched == oracle_alignment_matched(pred_pairs, gold_pairs)


def test_permutation_invariance():
    rng = random.Random(11)
    for _ in range(100):
        pred = random_annotation(rng)
        gold = random_annotation(rng)
        shuffled_pred = AnnotationSet(
            tuple(rng.sample(pred.characters, len(pred.characters))),
            tuple(rng.sample(pred.emotions, len(pred.emotions))),
        )
        shuffled_gold = AnnotationSet(
            tuple(rng.sample(gold.characters, len(gold.characters))),
            tuple(rng.sample(gold.emotions, len(gold.emotions))),
        )
        assert score_narrative(pred, gold) == score_narrative(shuffled_pred, shuffled_gold)


def test_character_matched_bounded_by_subclass_matched():
    rng = random.Random(23)
    for _ in range(200):
        counts = score_narrative(random_annotation(rng), random_annotation(rng))
        for dim in ("status", "gender", "identity", "age"):
            assert counts.character.matched <= counts.get(dim).matched
        for dim in DIMENSIONS:
            triple = counts.get(dim)
            assert triple.matched <= min(triple.predicted, triple.gold)


def test_f1_one_iff_multisets_equal():
    rng = random.Random(5)
    for _ in range(200):
        pred = random_annotation(rng)
        gold = random_annotation(rng)
        report = report_from_counts(score_narrative(pred, gold))
        chars_equal = sorted(map(str, pred.characters)) == sorted(map(str, gold.characters))
        f1 = report.dimensions["character"].f1
        if chars_equal and pred.characters:
            assert f1 == 1.0
        elif not chars_equal:
            assert f1 < 1.0


def test_aggregate_micro_hand_summed():
    first = MatchCounts(character=CountTriple(2, 3, 2))
    second = MatchCounts(character=CountTriple(1, 1, 1))
    report = aggregate_micro([first, second])
    metrics = report.dimensions["character"]
    assert report.counts.character == CountTriple(3, 4, 3)
    assert metrics.precision == pytest.approx(0.75)
    assert metrics.recall == pytest.approx(1.0)
    assert metrics.f1 == pytest.approx(6 / 7)


def test_aggregate_all_empty_corpus_is_degenerate_zero():
    empty = score_narrative(AnnotationSet(), AnnotationSet())
    report = aggregate_micro([empty, empty])
    for dim in DIMENSIONS:
        metrics = report.dimensions[dim]
        assert metrics.precision == metrics.recall == metrics.f1 == 0.0
        assert metrics.zero_predicted
        assert metrics.zero_gold


def test_single_narrative_aggregation_is_identity():
    counts = score_narrative(PARTY_GOLD, PARTY_GOLD)
    assert aggregate_micro([counts]) == report_from_counts(counts)


def test_scale_free_duplication():
    rng = random.Random(99)
    counts = [score_narrative(random_annotation(rng), random_annotation(rng)) for _ in range(20)]
    once = aggregate_micro(counts)
    twice = aggregate_micro(counts + counts)
    for dim in DIMENSIONS:
        assert once.dimensions[dim] == twice.dimensions[dim]


def test_macro_average():
    report_60 = aggregate_micro([MatchCounts(character=CountTriple(3, 5, 5))])
    report_70 = aggregate_micro([MatchCounts(character=CountTriple(7, 10, 10))])
    assert report_60.dimensions["character"].f1 == pytest.approx(0.6)
    assert report_70.dimensions["character"].f1 == pytest.approx(0.7)
    macro = macro_average(
        [SeriesReport("a", report_60), SeriesReport("b", report_70)]
    )
    assert macro.dimensions["character"].f1 == pytest.approx(0.65)
    same = macro_average([SeriesReport(str(i), report_60) for i in range(6)])
    assert same.dimensions["character"] == report_60.dimensions["character"]


def test_report_table_shape():
    counts = MatchCounts(
        status=CountTriple(82, 100, 99),
        gender=CountTriple(78, 100, 100),
        identity=CountTriple(76, 100, 100),
        age=CountTriple(86, 100, 100),
        character=CountTriple(6474, 10000, 10000),
        emotion=CountTriple(7513, 10000, 10000),
    )
    table = format_report_table([("baseline", report_from_counts(counts))])
    lines = table.splitlines()
    assert lines[0].split() == ["model", "status", "gender", "identity", "age", "character", "emotion"]
    assert "64.74" in lines[1] and "75.13" in lines[1]
    for cell in lines[1].split()[1:]:
        whole, _, fraction = cell.partition(".")
        assert len(fraction) == 2


def test_zero_denominator_flags():
    metrics = DimensionMetrics.from_triple(CountTriple(0, 0, 3))
    assert metrics.precision == 0.0 and metrics.zero_predicted and not metrics.zero_gold
    metrics = DimensionMetrics.from_triple(CountTriple(0, 3, 0))
    assert metrics.recall == 0.0 and metrics.zero_gold and not metrics.zero_predicted


def test_counts_add_as_a_monoid():
    rng = random.Random(3)
    counts = [score_narrative(random_annotation(rng), random_annotation(rng)) for _ in range(9)]
    left = counts[0]
    for c in counts[1:]:
        left = left + c
    right = counts[-1]
    for c in reversed(counts[:-1]):
        right = c + right
    assert left == right
    assert MatchCounts() + left == left
