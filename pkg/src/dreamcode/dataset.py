"""DreamBank-style corpus ingestion, splits, statistics and name anonymization.

The corpus format is newline-delimited JSON, one narrative per line:

    {"id": "emma-001", "series": "emma", "text": "...",
     "characters": ["1FKA", "2MSA"],
     "emotions": [{"who": "D", "emotion": "AP"}],
     "raw": false}

``characters``/``emotions`` are optional (absent = unannotated narrative);
``raw: true`` marks unmerged legacy codes, folded through
:func:`dreamcode.codes.merge_raw_code` on load.  ``dreamer`` is an optional
descriptor string.  Malformed lines are collected as :class:`SchemaError`
entries, never silently dropped.
"""

from __future__ import annotations

import json
import random
import warnings
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Union

from .codes import (
    AnnotationSet,
    CodeError,
    DREAMER,
    EmotionRecord,
    merge_raw_code,
    parse_character_code,
    parse_emotion_token,
    parse_raw_code,
)

# The six annotated English DreamBank series this tooling is usually run on.
DREAMBANK_SERIES = {
    "ed": ("adult man", "1980-2002"),
    "bea1": ("teenager girl", "2003-2005"),
    "b-baseline": ("adult woman", "1960-1997"),
    "emma": ("adult woman", "1949-1997"),
    "norms-m": ("adult men", "1940s-1950s"),
    "norms-f": ("adult women", "1940s-1950s"),
}


@dataclass(frozen=True)
class NarrativeRecord:
    id: str
    series: str
    text: str
    annotation: Optional[AnnotationSet] = None
    dreamer: str = ""

    @property
    def annotated(self) -> bool:
        return self.annotation is not None


@dataclass(frozen=True)
class SchemaError:
    line: int
    message: str
    record_id: Optional[str] = None

    def __str__(self) -> str:
        where = f"line {self.line}"
        if self.record_id:
            where += f" (id {self.record_id})"
        return f"{where}: {self.message}"


@dataclass(frozen=True)
class SeriesInfo:
    name: str
    dreamer: str
    years: str
    count: int


@dataclass(frozen=True)
class Corpus:
    records: tuple[NarrativeRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "records", tuple(self.records))

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def get(self, record_id: str) -> NarrativeRecord:
        for record in self.records:
            if record.id == record_id:
                return record
        raise KeyError(record_id)

    def series_ids(self) -> list[str]:
        return sorted({r.series for r in self.records})

    def series_info(self) -> list[SeriesInfo]:
        infos = []
        for name in self.series_ids():
            dreamer, years = DREAMBANK_SERIES.get(name, ("", ""))
            from_records = {r.dreamer for r in self.records if r.series == name and r.dreamer}
            if from_records:
                dreamer = sorted(from_records)[0]
            count = sum(1 for r in self.records if r.series == name)
            infos.append(SeriesInfo(name, dreamer, years, count))
        return infos


def _parse_annotation(record: dict, raw: bool) -> Optional[AnnotationSet]:
    if "characters" not in record and "emotions" not in record:
        return None
    characters = []
    for code_text in record.get("characters", []):
        if not isinstance(code_text, str):
            raise CodeError(f"character code must be a string, got {code_text!r}")
        if raw:
            characters.append(merge_raw_code(parse_raw_code(code_text)))
        else:
            characters.append(parse_character_code(code_text))
    emotions = []
    for entry in record.get("emotions", []):
        if not isinstance(entry, dict) or "who" not in entry or "emotion" not in entry:
            raise CodeError(f'emotion entry must be {{"who", "emotion"}}, got {entry!r}')
        who_text = entry["who"]
        if who_text == DREAMER:
            who = DREAMER
        elif raw:
            who = merge_raw_code(parse_raw_code(who_text))
        else:
            who = parse_character_code(who_text)
        emotions.append(EmotionRecord(who, parse_emotion_token(entry["emotion"])))
    annotation = AnnotationSet(tuple(characters), tuple(emotions))
    annotation.validate()
    return annotation


def load_corpus(source: Union[str, Path, Iterable[str]]) -> tuple[Corpus, list[SchemaError]]:
    """Load a newline-delimited corpus from a path or an iterable of lines.

    Returns the successfully parsed records plus one :class:`SchemaError` per
    rejected line (bad JSON, missing/ill-typed fields, unparseable codes,
    emotion experiencers missing from the character list, duplicate ids).
    """
    if isinstance(source, (str, Path)):
        lines: Iterable[str] = Path(source).read_text(encoding="utf-8").splitlines()
    else:
        lines = source
    records: list[NarrativeRecord] = []
    errors: list[SchemaError] = []
    seen_ids: set[str] = set()
    for line_number, line in enumerate(lines, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as err:
            errors.append(SchemaError(line_number, f"invalid JSON: {err}"))
            continue
        if not isinstance(payload, dict):
            errors.append(SchemaError(line_number, "record must be a JSON object"))
            continue
        record_id = payload.get("id")
        try:
            for key, kind in (("id", str), ("series", str), ("text", str)):
                value = payload.get(key)
                if not isinstance(value, kind) or (key != "text" and not value):
                    raise CodeError(f"field {key!r} must be a non-empty string")
            if record_id in seen_ids:
                raise CodeError(f"duplicate id {record_id!r}")
            annotation = _parse_annotation(payload, bool(payload.get("raw", False)))
        except (CodeError, ValueError) as err:
            errors.append(
                SchemaError(line_number, str(err), record_id if isinstance(record_id, str) else None)
            )
            continue
        seen_ids.add(record_id)
        records.append(
            NarrativeRecord(
                id=payload["id"],
                series=payload["series"],
                text=payload["text"],
                annotation=annotation,
                dreamer=str(payload.get("dreamer", "")),
            )
        )
    return Corpus(tuple(records)), errors


def filter_max_characters(corpus: Corpus, max_chars: int) -> Corpus:
    """Keep narratives with at most ``max_chars`` characters.

    ``max_chars=7`` reproduces the usual "fewer than eight characters"
    training/evaluation subset.  Unannotated narratives count as zero."""
    kept = [
        r
        for r in corpus
        if len(r.annotation.characters if r.annotation else ()) <= max_chars
    ]
    return Corpus(tuple(kept))


@dataclass(frozen=True)
class Fold:
    train: tuple[str, ...]
    eval: tuple[str, ...]


@dataclass(frozen=True)
class SplitPlan:
    kind: str  # "loso" | "kfold"
    folds: tuple[Fold, ...]
    seed: Optional[int] = None

    def to_dict(self) -> dict:
        payload: dict = {"kind": self.kind}
        if self.seed is not None:
            payload["seed"] = self.seed
        payload["folds"] = [
            {"train": list(f.train), "eval": list(f.eval)} for f in self.folds
        ]
        return payload

    @classmethod
    def from_dict(cls, payload: dict) -> "SplitPlan":
        folds = tuple(
            Fold(tuple(f["train"]), tuple(f["eval"])) for f in payload["folds"]
        )
        return cls(payload["kind"], folds, payload.get("seed"))


def leave_one_series_out(corpus: Corpus) -> SplitPlan:
    """One fold per series (lexicographic order); the fold evaluates exactly
    that series and trains on all others."""
    series = corpus.series_ids()
    if len(series) == 1:
        warnings.warn("corpus has a single series; its fold has an empty train set")
    folds = []
    for name in series:
        eval_ids = tuple(r.id for r in corpus if r.series == name)
        train_ids = tuple(r.id for r in corpus if r.series != name)
        folds.append(Fold(train_ids, eval_ids))
    return SplitPlan("loso", tuple(folds))


def kfold_cross_series(corpus: Corpus, k: int = 5, seed: int = 0) -> SplitPlan:
    """Seeded shuffle then k near-equal folds, ignoring series boundaries
    (series leakage across train/eval is intentional here)."""
    if k < 1:
        raise ValueError("k must be at least 1")
    if k == 1:
        warnings.warn("k=1 evaluates everything with an empty train set")
    ids = [r.id for r in corpus]
    rng = random.Random(seed)
    rng.shuffle(ids)
    base, remainder = divmod(len(ids), k)
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < remainder else 0)
        eval_ids = tuple(ids[start : start + size])
        start += size
        eval_set = set(eval_ids)
        train_ids = tuple(i for i in ids if i not in eval_set)
        folds.append(Fold(train_ids, eval_ids))
    return SplitPlan("kfold", tuple(folds), seed)


@dataclass(frozen=True)
class CorpusStats:
    total_narratives: int
    annotated_narratives: int
    zero_character_narratives: int
    mean_characters: float
    zero_emotion_narratives: int
    mean_emotions_emotional: float
    characters_total: int
    emotions_total: int
    dreamer_emotions: int
    status_counts: dict[str, int] = field(default_factory=dict)
    gender_counts: dict[str, int] = field(default_factory=dict)
    identity_counts: dict[str, int] = field(default_factory=dict)
    age_counts: dict[str, int] = field(default_factory=dict)
    emotion_counts: dict[str, int] = field(default_factory=dict)

    @property
    def dreamer_emotion_share(self) -> float:
        return self.dreamer_emotions / self.emotions_total if self.emotions_total else 0.0

    def to_dict(self) -> dict:
        return {
            "total_narratives": self.total_narratives,
            "annotated_narratives": self.annotated_narratives,
            "zero_character_narratives": self.zero_character_narratives,
            "mean_characters": self.mean_characters,
            "zero_emotion_narratives": self.zero_emotion_narratives,
            "mean_emotions_emotional": self.mean_emotions_emotional,
            "characters_total": self.characters_total,
            "emotions_total": self.emotions_total,
            "dreamer_emotions": self.dreamer_emotions,
            "dreamer_emotion_share": self.dreamer_emotion_share,
            "status_counts": self.status_counts,
            "gender_counts": self.gender_counts,
            "identity_counts": self.identity_counts,
            "age_counts": self.age_counts,
            "emotion_counts": self.emotion_counts,
        }


def corpus_stats(corpus: Corpus) -> CorpusStats:
    """Counts and distributions over the annotated narratives: characters and
    emotions per narrative, subclass distributions, emotion distribution and
    the dreamer's share of emotions."""
    annotated = [r for r in corpus if r.annotation is not None]
    status: dict[str, int] = {}
    gender: dict[str, int] = {}
    identity: dict[str, int] = {}
    age: dict[str, int] = {}
    emotion: dict[str, int] = {}
    characters_total = emotions_total = dreamer_emotions = 0
    zero_characters = zero_emotions = 0
    emotional_narratives = 0
    for record in annotated:
        annotation = record.annotation
        assert annotation is not None
        if not annotation.characters:
            zero_characters += 1
        if not annotation.emotions:
            zero_emotions += 1
        else:
            emotional_narratives += 1
        characters_total += len(annotation.characters)
        emotions_total += len(annotation.emotions)
        for code in annotation.characters:
            status[code.status.label] = status.get(code.status.label, 0) + 1
            gender[code.gender.label] = gender.get(code.gender.label, 0) + 1
            identity[code.identity.label] = identity.get(code.identity.label, 0) + 1
            age[code.age.label] = age.get(code.age.label, 0) + 1
        for rec in annotation.emotions:
            emotion[rec.emotion.noun] = emotion.get(rec.emotion.noun, 0) + 1
            if rec.who == DREAMER:
                dreamer_emotions += 1
    return CorpusStats(
        total_narratives=len(corpus),
        annotated_narratives=len(annotated),
        zero_character_narratives=zero_characters,
        mean_characters=characters_total / len(annotated) if annotated else 0.0,
        zero_emotion_narratives=zero_emotions,
        mean_emotions_emotional=(
            emotions_total / emotional_narratives if emotional_narratives else 0.0
        ),
        characters_total=characters_total,
        emotions_total=emotions_total,
        dreamer_emotions=dreamer_emotions,
        status_counts=status,
        gender_counts=gender,
        identity_counts=identity,
        age_counts=age,
        emotion_counts=emotion,
    )


class OverlappingSpans(ValueError):
    pass


@dataclass(frozen=True)
class EntitySpan:
    start: int
    end: int
    surface: str = ""


def anonymize_names(text: str, spans: Iterable[EntitySpan]) -> str:
    """Replace person-name spans with indexed "[PERi]" tokens.

    Each distinct surface form (case-insensitive) gets one index, assigned in
    order of first appearance; every span with that surface becomes the same
    token.  Spans must lie within the text and not overlap."""
    ordered = sorted(spans, key=lambda s: (s.start, s.end))
    previous_end = 0
    for span in ordered:
        if not (0 <= span.start < span.end <= len(text)):
            raise ValueError(f"span {span.start}:{span.end} outside text of length {len(text)}")
        if span.start < previous_end:
            raise OverlappingSpans(f"span {span.start}:{span.end} overlaps the previous span")
        previous_end = span.end
    indices: dict[str, int] = {}
    pieces = []
    cursor = 0
    for span in ordered:
        surface = text[span.start : span.end].lower()
        if surface not in indices:
            indices[surface] = len(indices) + 1
        pieces.append(text[cursor : span.start])
        pieces.append(f"[PER{indices[surface]}]")
        cursor = span.end
    pieces.append(text[cursor:])
    return "".join(pieces)
