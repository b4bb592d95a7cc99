"""Hall/Van de Castle (HVdC) character and emotion codes for people in dreams.

A character is coded by four symbols: status digit, gender letter, identity
letter, age letter ("1FKA" = individual alive, female, known, adult).
Emotions (AN/AP/SD/CO/HA) are attached to an experiencer, either a coded
character or the dreamer ("D").

Identity and age use the merged subclass scheme (family/relatives folded into
"known", uncertain into "stranger", baby/adolescent into "child");
:func:`merge_raw_code` converts unmerged legacy codes.  The symbol tables at
module level are the extension seam for codes beyond people (animals,
creatures), which the default alphabet rejects.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Literal, Union


class CodeError(ValueError):
    """A symbol or token could not be decoded.

    ``symbol`` and ``position`` (1-based within the 4-symbol code) are set
    when the failure points at a single symbol.
    """

    def __init__(self, message: str, symbol: str | None = None, position: int | None = None):
        super().__init__(message)
        self.symbol = symbol
        self.position = position


class InvalidStatus(CodeError):
    pass


class InvalidGender(CodeError):
    pass


class InvalidIdentity(CodeError):
    pass


class InvalidAge(CodeError):
    pass


class UnknownEmotion(CodeError):
    pass


class InvalidRawSymbol(CodeError):
    pass


class StatusClass(str, Enum):
    INDIVIDUAL_ALIVE = "1"
    GROUP_ALIVE = "2"
    DEAD_INDIVIDUAL = "3"
    DEAD_GROUP = "4"
    IMAGINARY_INDIVIDUAL = "5"
    IMAGINARY_GROUP = "6"
    ORIGINAL_FORM = "7"
    CHANGED_FORM = "8"

    @property
    def label(self) -> str:
        return _STATUS_LABELS[self]

    @property
    def is_group(self) -> bool:
        """Group statuses are 2 (alive), 4 (dead) and 6 (imaginary)."""
        return self in (StatusClass.GROUP_ALIVE, StatusClass.DEAD_GROUP, StatusClass.IMAGINARY_GROUP)


class GenderClass(str, Enum):
    MALE = "M"
    FEMALE = "F"
    JOINT = "J"
    INDEFINITE = "I"

    @property
    def label(self) -> str:
        return _GENDER_LABELS[self]


class IdentityClass(str, Enum):
    KNOWN = "K"
    PROMINENT = "P"
    OCCUPATIONAL = "O"
    ETHNIC = "E"
    STRANGER = "S"

    @property
    def label(self) -> str:
        return _IDENTITY_LABELS[self]


class AgeClass(str, Enum):
    ADULT = "A"
    CHILD = "C"

    @property
    def label(self) -> str:
        return _AGE_LABELS[self]


_STATUS_LABELS = {
    StatusClass.INDIVIDUAL_ALIVE: "individual alive",
    StatusClass.GROUP_ALIVE: "group alive",
    StatusClass.DEAD_INDIVIDUAL: "dead individual",
    StatusClass.DEAD_GROUP: "dead group",
    StatusClass.IMAGINARY_INDIVIDUAL: "imaginary individual",
    StatusClass.IMAGINARY_GROUP: "imaginary group",
    StatusClass.ORIGINAL_FORM: "original form",
    StatusClass.CHANGED_FORM: "changed form",
}

_GENDER_LABELS = {
    GenderClass.MALE: "male",
    GenderClass.FEMALE: "female",
    GenderClass.JOINT: "joint",
    GenderClass.INDEFINITE: "indefinite",
}

_IDENTITY_LABELS = {
    IdentityClass.KNOWN: "known",
    IdentityClass.PROMINENT: "prominent",
    IdentityClass.OCCUPATIONAL: "occupational",
    IdentityClass.ETHNIC: "ethnic",
    IdentityClass.STRANGER: "stranger",
}

_AGE_LABELS = {
    AgeClass.ADULT: "adult",
    AgeClass.CHILD: "child",
}

# Symbol -> class member tables used by the parser. Replacing or extending
# these (e.g. with animal/creature statuses) is the supported extension seam.
STATUS_BY_SYMBOL = {m.value: m for m in StatusClass}
GENDER_BY_SYMBOL = {m.value: m for m in GenderClass}
IDENTITY_BY_SYMBOL = {m.value: m for m in IdentityClass}
AGE_BY_SYMBOL = {m.value: m for m in AgeClass}

# Label phrase -> class member, the vocabulary strict decoders validate against.
STATUS_BY_LABEL = {m.label: m for m in StatusClass}
GENDER_BY_LABEL = {m.label: m for m in GenderClass}
IDENTITY_BY_LABEL = {m.label: m for m in IdentityClass}
AGE_BY_LABEL = {m.label: m for m in AgeClass}


class EmotionLabel(str, Enum):
    ANGER = "AN"
    APPREHENSION = "AP"
    SADNESS = "SD"
    CONFUSION = "CO"
    HAPPINESS = "HA"

    @property
    def adjective(self) -> str:
        return _EMOTION_ADJECTIVES[self]

    @property
    def noun(self) -> str:
        return self.name.lower()


_EMOTION_ADJECTIVES = {
    EmotionLabel.ANGER: "angry",
    EmotionLabel.APPREHENSION: "apprehensive",
    EmotionLabel.SADNESS: "sad",
    EmotionLabel.CONFUSION: "confused",
    EmotionLabel.HAPPINESS: "happy",
}

EMOTION_BY_CODE = {m.value: m for m in EmotionLabel}
EMOTION_BY_ADJECTIVE = {m.adjective: m for m in EmotionLabel}

#: Canonical text form of the dreamer as an emotion experiencer.
DREAMER: Literal["D"] = "D"


@dataclass(frozen=True, order=True)
class CharacterCode:
    """One coded character: status, gender, identity, age."""

    status: StatusClass
    gender: GenderClass
    identity: IdentityClass
    age: AgeClass

    def __str__(self) -> str:
        # class members are str subclasses, so this concatenates the symbols
        return self.status + self.gender + self.identity + self.age


#: An emotion experiencer: a coded character, or the dreamer symbol "D".
Experiencer = Union[CharacterCode, Literal["D"]]


@dataclass(frozen=True)
class EmotionRecord:
    who: Experiencer
    emotion: EmotionLabel


@dataclass(frozen=True)
class AnnotationSet:
    """Characters (with multiplicity, in annotation order) plus emotion records."""

    characters: tuple[CharacterCode, ...] = ()
    emotions: tuple[EmotionRecord, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "characters", tuple(self.characters))
        object.__setattr__(self, "emotions", tuple(self.emotions))

    def validate(self) -> None:
        """Enforce the gold-data invariant: every character experiencer must
        appear in ``characters``.  Predictions are never validated this way;
        dangling experiencers there simply score as wrong emotion tuples."""
        known = set(self.characters)
        for record in self.emotions:
            if record.who != DREAMER and record.who not in known:
                raise ValueError(
                    f"emotion experiencer {record.who} is not among the annotated characters"
                )


# The 320-value code universe is closed, so parsed codes are interned.
_CODE_CACHE: dict[str, CharacterCode] = {}


def parse_character_code(text: str) -> CharacterCode:
    """Parse a 4-symbol character code such as "1FKA".

    Surrounding whitespace is ignored.  Raises :class:`InvalidStatus`,
    :class:`InvalidGender`, :class:`InvalidIdentity` or :class:`InvalidAge`
    naming the offending symbol and its position; a :class:`CodeError` when
    the text is not exactly four symbols long.
    """
    s = text.strip()
    cached = _CODE_CACHE.get(s)
    if cached is not None:
        return cached
    if len(s) != 4:
        raise CodeError(f"expected a 4-symbol character code, got {text!r}")
    status = STATUS_BY_SYMBOL.get(s[0])
    if status is None:
        raise InvalidStatus(f"invalid status symbol {s[0]!r} at position 1", s[0], 1)
    gender = GENDER_BY_SYMBOL.get(s[1])
    if gender is None:
        raise InvalidGender(f"invalid gender symbol {s[1]!r} at position 2", s[1], 2)
    identity = IDENTITY_BY_SYMBOL.get(s[2])
    if identity is None:
        raise InvalidIdentity(f"invalid identity symbol {s[2]!r} at position 3", s[2], 3)
    age = AGE_BY_SYMBOL.get(s[3])
    if age is None:
        raise InvalidAge(f"invalid age symbol {s[3]!r} at position 4", s[3], 4)
    code = CharacterCode(status, gender, identity, age)
    _CODE_CACHE[s] = code
    return code


def format_character_code(code: CharacterCode) -> str:
    """Inverse of :func:`parse_character_code`: the canonical 4-symbol string."""
    return str(code)


def describe(code: CharacterCode) -> tuple[str, str, str, str]:
    """The natural-language label of each class, in status/gender/identity/age order."""
    return (
        _STATUS_LABELS[code.status],
        _GENDER_LABELS[code.gender],
        _IDENTITY_LABELS[code.identity],
        _AGE_LABELS[code.age],
    )


def parse_emotion_token(text: str) -> EmotionLabel:
    """Resolve an emotion given either as code ("AP") or adjective ("apprehensive")."""
    token = text.strip()
    label = EMOTION_BY_CODE.get(token) or EMOTION_BY_ADJECTIVE.get(token)
    if label is None:
        raise UnknownEmotion(f"unknown emotion token {token!r}", token)
    return label


# Unmerged (legacy) identity and age alphabets, per the HVdC coding guidelines:
# identity F = immediate family, R = relatives, U = uncertain;
# age T = teenager, B = baby.
RAW_IDENTITY_SYMBOLS = frozenset("FRKPOESU")
RAW_AGE_SYMBOLS = frozenset("ATCB")

_IDENTITY_MERGE = {"F": "K", "R": "K", "U": "S"}
_AGE_MERGE = {"T": "C", "B": "C"}


@dataclass(frozen=True)
class RawCode:
    """An unmerged character code; symbols validated by :func:`merge_raw_code`."""

    status: str
    gender: str
    identity: str
    age: str

    def __str__(self) -> str:
        return self.status + self.gender + self.identity + self.age


def merge_raw_code(raw: RawCode) -> CharacterCode:
    """Collapse unmerged subclasses: identity F/R -> K and U -> S, age T/B -> C.

    Status and gender are unchanged.  Raises :class:`InvalidRawSymbol` when a
    symbol is outside the raw alphabets.
    """
    if raw.status not in STATUS_BY_SYMBOL:
        raise InvalidRawSymbol(f"invalid raw status symbol {raw.status!r} at position 1", raw.status, 1)
    if raw.gender not in GENDER_BY_SYMBOL:
        raise InvalidRawSymbol(f"invalid raw gender symbol {raw.gender!r} at position 2", raw.gender, 2)
    if raw.identity not in RAW_IDENTITY_SYMBOLS:
        raise InvalidRawSymbol(f"invalid raw identity symbol {raw.identity!r} at position 3", raw.identity, 3)
    if raw.age not in RAW_AGE_SYMBOLS:
        raise InvalidRawSymbol(f"invalid raw age symbol {raw.age!r} at position 4", raw.age, 4)
    return CharacterCode(
        STATUS_BY_SYMBOL[raw.status],
        GENDER_BY_SYMBOL[raw.gender],
        IDENTITY_BY_SYMBOL[_IDENTITY_MERGE.get(raw.identity, raw.identity)],
        AGE_BY_SYMBOL[_AGE_MERGE.get(raw.age, raw.age)],
    )


def parse_raw_code(text: str) -> RawCode:
    """Split a 4-symbol unmerged code into a :class:`RawCode` (symbols are
    validated on merge)."""
    s = text.strip()
    if len(s) != 4:
        raise InvalidRawSymbol(f"expected a 4-symbol raw character code, got {text!r}")
    return RawCode(s[0], s[1], s[2], s[3])
