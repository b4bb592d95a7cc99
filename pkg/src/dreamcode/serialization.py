"""Natural-language serialization of annotation sets, and strict decoding back.

A target text is a space-joined sequence of segments.  Character segments
start with "[CHARACTER]" and follow one of four strategy grammars; emotion
segments are "[EMOTION] <subject> is <adjective>".  An empty side is the
literal sentence "There is no character." / "There is no emotion.".

Decoding is strict: every class phrase must belong to the fixed label
vocabulary, the trailing "[SYMBOL]" code must agree with the phrases, and a
prediction with any violation becomes a :class:`NullPrediction` carrying a
reason, never an exception.  The decoder is layout-agnostic (segments may
appear in any order) and tolerates only repeated internal whitespace.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum
from typing import Union

from .codes import (
    AGE_BY_LABEL,
    AnnotationSet,
    CharacterCode,
    CodeError,
    DREAMER,
    EMOTION_BY_ADJECTIVE,
    EmotionRecord,
    GENDER_BY_LABEL,
    IDENTITY_BY_LABEL,
    STATUS_BY_LABEL,
    StatusClass,
    describe,
    parse_character_code,
)


class Strategy(str, Enum):
    BASELINE = "baseline"
    COMMA = "comma"
    MARKER = "marker"
    NO_SEMANTICS = "no_semantics"


class OrderPolicy(str, Enum):
    AS_GIVEN = "as_given"
    GROUP_FIRST = "group_first"
    INDIVIDUAL_FIRST = "individual_first"


class LayoutPolicy(str, Enum):
    CHARACTERS_THEN_EMOTIONS = "characters_then_emotions"
    EMOTIONS_FIRST = "emotions_first"


NO_CHARACTER_SENTENCE = "There is no character."
NO_EMOTION_SENTENCE = "There is no emotion."
DREAMER_PHRASE = "the dreamer"

# Decode failure reasons.
UNKNOWN_MARKER_STRUCTURE = "unknown-marker-structure"
UNKNOWN_CLASS_PHRASE = "unknown-class-phrase"
SYMBOL_PHRASE_MISMATCH = "symbol-phrase-mismatch"
UNKNOWN_EMOTION_ADJECTIVE = "unknown-emotion-adjective"
UNPARSEABLE_CODE = "unparseable-code"


@dataclass(frozen=True)
class NullPrediction:
    """A generation that failed strict decoding; scored as an empty prediction."""

    reason: str


PredictionOutcome = Union[AnnotationSet, NullPrediction]


class _DecodeFailure(Exception):
    def __init__(self, reason: str, detail: str = ""):
        super().__init__(detail or reason)
        self.reason = reason
        self.detail = detail


_GROUP_STATUSES = frozenset(m for m in StatusClass if m.is_group)


def reorder(annotation: AnnotationSet, order: OrderPolicy) -> AnnotationSet:
    """Stable partition of the character list by group/individual status;
    emotions are untouched."""
    if order == OrderPolicy.AS_GIVEN:
        return annotation
    groups = [c for c in annotation.characters if c.status in _GROUP_STATUSES]
    individuals = [c for c in annotation.characters if c.status not in _GROUP_STATUSES]
    if order == OrderPolicy.GROUP_FIRST:
        ordered = groups + individuals
    else:
        ordered = individuals + groups
    return AnnotationSet(tuple(ordered), annotation.emotions)


# Segments are deterministic over a closed universe (320 codes x 4 grammars),
# so they are rendered once and reused.
_SEGMENT_CACHE: dict[tuple[CharacterCode, Strategy], str] = {}


def _character_segment(code: CharacterCode, strategy: Strategy) -> str:
    cached = _SEGMENT_CACHE.get((code, strategy))
    if cached is not None:
        return cached
    status, gender, identity, age = describe(code)
    symbols = str(code)
    if strategy == Strategy.BASELINE:
        segment = (
            f"[CHARACTER] status is {status}, gender is {gender}, "
            f"identity is {identity}, age is {age} [SYMBOL] {symbols}"
        )
    elif strategy == Strategy.COMMA:
        segment = f"[CHARACTER] {status}, {gender}, {identity}, {age} [SYMBOL] {symbols}"
    elif strategy == Strategy.MARKER:
        segment = (
            f"[CHARACTER] [STATUS] {status} [GENDER] {gender} "
            f"[IDENTITY] {identity} [AGE] {age} [SYMBOL] {symbols}"
        )
    else:
        segment = f"[CHARACTER] {symbols}"
    _SEGMENT_CACHE[(code, strategy)] = segment
    return segment


_ADJECTIVES = {label: label.adjective for label in EMOTION_BY_ADJECTIVE.values()}


def _emotion_segment(record: EmotionRecord) -> str:
    subject = DREAMER_PHRASE if record.who == DREAMER else str(record.who)
    return f"[EMOTION] {subject} is {_ADJECTIVES[record.emotion]}"


def encode(
    annotation: AnnotationSet,
    strategy: Strategy,
    order: OrderPolicy = OrderPolicy.AS_GIVEN,
    layout: LayoutPolicy = LayoutPolicy.CHARACTERS_THEN_EMOTIONS,
) -> str:
    """Render an annotation set as target text under the given strategy,
    character order and segment layout."""
    ordered = reorder(annotation, order)
    character_parts = [_character_segment(c, strategy) for c in ordered.characters]
    if not character_parts:
        character_parts = [NO_CHARACTER_SENTENCE]
    emotion_parts = [_emotion_segment(e) for e in ordered.emotions]
    if not emotion_parts:
        emotion_parts = [NO_EMOTION_SENTENCE]
    if layout == LayoutPolicy.EMOTIONS_FIRST:
        parts = emotion_parts + character_parts
    else:
        parts = character_parts + emotion_parts
    return " ".join(parts)


_SEGMENT_DELIMITER = re.compile(
    r"(\[CHARACTER\]|\[EMOTION\]|There is no character\.|There is no emotion\.)"
)
_MARKER_GRAMMAR = re.compile(
    r"\[STATUS\] (.*) \[GENDER\] (.*) \[IDENTITY\] (.*) \[AGE\] (.*)"
)

_BASELINE_PREFIXES = ("status is ", "gender is ", "identity is ", "age is ")
_CLASS_VOCABULARIES = (STATUS_BY_LABEL, GENDER_BY_LABEL, IDENTITY_BY_LABEL, AGE_BY_LABEL)


def _lookup_phrases(phrases: tuple[str, str, str, str]) -> CharacterCode:
    members = []
    for phrase, vocabulary in zip(phrases, _CLASS_VOCABULARIES):
        member = vocabulary.get(phrase)
        if member is None:
            raise _DecodeFailure(UNKNOWN_CLASS_PHRASE, f"not a class label: {phrase!r}")
        members.append(member)
    # members are str subclasses; reuse the interned code instance
    return parse_character_code(members[0] + members[1] + members[2] + members[3])


def _split_class_phrases(text: str, strategy: Strategy) -> tuple[str, str, str, str]:
    if strategy == Strategy.MARKER:
        match = _MARKER_GRAMMAR.fullmatch(text)
        if match is None:
            raise _DecodeFailure(UNKNOWN_MARKER_STRUCTURE, f"bad marker segment: {text!r}")
        return match.groups()  # type: ignore[return-value]
    pieces = text.split(", ")
    if len(pieces) != 4:
        raise _DecodeFailure(UNKNOWN_MARKER_STRUCTURE, f"expected 4 class phrases: {text!r}")
    if strategy == Strategy.BASELINE:
        phrases = []
        for piece, prefix in zip(pieces, _BASELINE_PREFIXES):
            if not piece.startswith(prefix):
                raise _DecodeFailure(
                    UNKNOWN_MARKER_STRUCTURE, f"missing {prefix!r} marker in {piece!r}"
                )
            phrases.append(piece[len(prefix):])
        return tuple(phrases)  # type: ignore[return-value]
    return tuple(pieces)  # type: ignore[return-value]


def _parse_character_body(body: str, strategy: Strategy) -> CharacterCode:
    if strategy == Strategy.NO_SEMANTICS:
        try:
            return parse_character_code(body)
        except CodeError as err:
            raise _DecodeFailure(UNPARSEABLE_CODE, str(err)) from err
    pieces = body.split("[SYMBOL]")
    if len(pieces) != 2:
        raise _DecodeFailure(
            UNKNOWN_MARKER_STRUCTURE, f"expected one [SYMBOL] marker in {body!r}"
        )
    from_phrases = _lookup_phrases(_split_class_phrases(pieces[0].strip(), strategy))
    try:
        from_symbols = parse_character_code(pieces[1])
    except CodeError as err:
        raise _DecodeFailure(UNPARSEABLE_CODE, str(err)) from err
    if from_symbols != from_phrases:
        raise _DecodeFailure(
            SYMBOL_PHRASE_MISMATCH,
            f"code {from_symbols} disagrees with phrases {from_phrases}",
        )
    return from_symbols


def _parse_emotion_body(body: str) -> EmotionRecord:
    pieces = body.split(" is ")
    if len(pieces) != 2:
        raise _DecodeFailure(UNKNOWN_MARKER_STRUCTURE, f"bad emotion segment: {body!r}")
    subject, adjective = pieces
    if subject in (DREAMER_PHRASE, DREAMER):
        who = DREAMER
    else:
        try:
            who = parse_character_code(subject)
        except CodeError as err:
            raise _DecodeFailure(UNPARSEABLE_CODE, str(err)) from err
    emotion = EMOTION_BY_ADJECTIVE.get(adjective)
    if emotion is None:
        raise _DecodeFailure(UNKNOWN_EMOTION_ADJECTIVE, f"not an emotion adjective: {adjective!r}")
    return EmotionRecord(who, emotion)


def _decode(text: str, strategy: Strategy) -> AnnotationSet:
    normalized = " ".join(str(text).split())
    parts = _SEGMENT_DELIMITER.split(normalized)
    if parts[0].strip():
        raise _DecodeFailure(
            UNKNOWN_MARKER_STRUCTURE, f"text before first segment: {parts[0].strip()!r}"
        )
    if len(parts) == 1:
        raise _DecodeFailure(UNKNOWN_MARKER_STRUCTURE, "no segment markers found")
    characters: list[CharacterCode] = []
    emotions: list[EmotionRecord] = []
    no_character = no_emotion = 0
    for marker, body in zip(parts[1::2], parts[2::2]):
        body = body.strip()
        if marker == "[CHARACTER]":
            characters.append(_parse_character_body(body, strategy))
        elif marker == "[EMOTION]":
            emotions.append(_parse_emotion_body(body))
        else:
            if body:
                raise _DecodeFailure(
                    UNKNOWN_MARKER_STRUCTURE, f"trailing text after {marker!r}: {body!r}"
                )
            if marker == NO_CHARACTER_SENTENCE:
                no_character += 1
            else:
                no_emotion += 1
    if no_character > 1 or no_emotion > 1:
        raise _DecodeFailure(UNKNOWN_MARKER_STRUCTURE, "repeated empty-side sentence")
    if bool(characters) == bool(no_character):
        raise _DecodeFailure(
            UNKNOWN_MARKER_STRUCTURE,
            "character part must be segments or the no-character sentence, exactly one",
        )
    if bool(emotions) == bool(no_emotion):
        raise _DecodeFailure(
            UNKNOWN_MARKER_STRUCTURE,
            "emotion part must be segments or the no-emotion sentence, exactly one",
        )
    return AnnotationSet(tuple(characters), tuple(emotions))


def decode(text: str, strategy: Strategy) -> PredictionOutcome:
    """Strictly decode generated target text back into an annotation set.

    Returns a :class:`NullPrediction` with a reason on any violation; never
    raises.  Emotion experiencers are not checked against the decoded
    character list (a dangling experiencer is a scoring matter, not a decoding
    failure).
    """
    try:
        return _decode(text, strategy)
    except _DecodeFailure as failure:
        return NullPrediction(failure.reason)
