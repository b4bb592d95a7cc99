from __future__ import annotations

import itertools
import json
import random

import pytest

from dreamcode.codes import (
    AgeClass,
    AnnotationSet,
    CharacterCode,
    DREAMER,
    EmotionLabel,
    EmotionRecord,
    GenderClass,
    IdentityClass,
    StatusClass,
)

ALL_CODES = [
    CharacterCode(s, g, i, a)
    for s, g, i, a in itertools.product(StatusClass, GenderClass, IdentityClass, AgeClass)
]


def random_annotation(rng: random.Random, max_characters: int = 6) -> AnnotationSet:
    characters = tuple(
        rng.choice(ALL_CODES) for _ in range(rng.randint(0, max_characters))
    )
    emotions = []
    for _ in range(rng.randint(0, 3)):
        if characters and rng.random() < 0.6:
            who = rng.choice(characters)
        else:
            who = DREAMER
        emotions.append(EmotionRecord(who, rng.choice(list(EmotionLabel))))
    return AnnotationSet(characters, tuple(emotions))


def record_line(
    record_id: str,
    series: str,
    text: str,
    characters: list[str] | None = None,
    emotions: list[dict] | None = None,
    **extra,
) -> str:
    payload: dict = {"id": record_id, "series": series, "text": text}
    if characters is not None:
        payload["characters"] = characters
    if emotions is not None:
        payload["emotions"] = emotions
    payload.update(extra)
    return json.dumps(payload)


def fixture_corpus_lines() -> list[str]:
    """A deterministic 20-narrative corpus: 4 series x 5 narratives, every
    series containing characters and at least one emotion, plus empty and
    zero-emotion narratives."""
    rng = random.Random(90125)
    lines = []
    for series_index, series in enumerate(("alder", "birch", "cedar", "dogwood")):
        for narrative_index in range(5):
            record_id = f"{series}-{narrative_index:03d}"
            text = f"Dream {narrative_index} of the {series} series."
            if narrative_index == 3:
                # a narrative with no characters and no emotions
                lines.append(record_line(record_id, series, text, [], []))
                continue
            annotation = random_annotation(rng)
            while not annotation.characters:
                annotation = random_annotation(rng)
            characters = [str(c) for c in annotation.characters]
            if narrative_index == 0:
                # anchor an emotion so every series has one
                emotions = [{"who": "D", "emotion": "AP"}]
            elif narrative_index == 4:
                emotions = []
            else:
                emotions = [
                    {"who": e.who if isinstance(e.who, str) else str(e.who), "emotion": e.emotion.value}
                    for e in annotation.emotions
                ]
            lines.append(record_line(record_id, series, text, characters, emotions))
    return lines


@pytest.fixture
def fixture_corpus_path(tmp_path):
    path = tmp_path / "fixture_corpus.jsonl"
    path.write_text("\n".join(fixture_corpus_lines()) + "\n", encoding="utf-8")
    return path
