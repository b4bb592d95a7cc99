"""Few-shot prompt construction for character prediction with a chat-style
model, and parsing of the assistant's "CHARACTERS:" output format.

Worked examples are drawn uniformly without replacement from narratives of
*other* series than the target (never the target's own dreamer), with
prefix-stable sampling: for a fixed seed the k=1 example list is a prefix of
the k=3 list, isolating the effect of k.
"""

from __future__ import annotations

import random
import re
from dataclasses import dataclass

from .codes import CharacterCode
from .dataset import Corpus, NarrativeRecord
from .serialization import (
    NO_CHARACTER_SENTENCE,
    NullPrediction,
    Strategy,
    UNKNOWN_MARKER_STRUCTURE,
    _DecodeFailure,
    _lookup_phrases,
    _split_class_phrases,
)

#: Fixed instruction block for assistant-style character classification.
#: Emitted byte-for-byte at the head of every built prompt.
CHARACTER_PROMPT = '''### System:
You are StableBeluga, an AI that follows instructions extremely well. Help as much as you can. You know the Hall and Van de Castle annotation scheme.
### User:
Classify CHARACTERS (status, gender, identity, and age) in a DREAM REPORT.
Given a DREAM REPORT, you must follow the  format: CHARACTERS: [CHARACTER]status is <status>, gender is <gender>, identity is  <identity>, age is <age>
Where: <status> must be in {"1":"individual alive", "2":"group alive", "3":"dead individual", "4": "dead group", "5":"imaginary individual", "6":"imaginary group", "7": "original form", "8":"changed form"}
<gender> must be in {"M":"male", "F":"female", "J": "joint", "I":"indefinite"}
<age> must be in {"A":"adult", "C":"child"}
<identity> must be in {"K":"known", "P":"prominent", "O":"occupational", "E":"ethnic", "S": "stranger"}
Use [CHARACTERS] to separate multiple characters. Do not classify the dreamer.
### Assistant:
'''


class PoolTooSmall(ValueError):
    pass


@dataclass(frozen=True)
class PromptConfig:
    target_id: str
    k: int = 0
    seed: int = 0


def render_character_line(codes: tuple[CharacterCode, ...]) -> str:
    """Characters in the assistant output grammar: "[CHARACTER]status is ...,
    age is ..." with "[CHARACTERS]" separating subsequent characters."""
    if not codes:
        return NO_CHARACTER_SENTENCE
    bodies = [
        f"status is {c.status.label}, gender is {c.gender.label}, "
        f"identity is {c.identity.label}, age is {c.age.label}"
        for c in codes
    ]
    return "[CHARACTER]" + " [CHARACTERS]".join(bodies)


def sample_examples(config: PromptConfig, corpus: Corpus) -> list[NarrativeRecord]:
    """Deterministic, prefix-stable choice of k annotated narratives from
    series other than the target's."""
    target = corpus.get(config.target_id)
    pool = sorted(
        (r for r in corpus if r.series != target.series and r.annotated),
        key=lambda r: r.id,
    )
    if len(pool) < config.k:
        raise PoolTooSmall(
            f"need {config.k} examples but only {len(pool)} eligible narratives exist"
        )
    rng = random.Random(config.seed)
    rng.shuffle(pool)
    return pool[: config.k]


def build_prompt(config: PromptConfig, corpus: Corpus) -> str:
    """The instruction block, k worked examples, then the target narrative as
    a final user turn."""
    target = corpus.get(config.target_id)
    parts = [CHARACTER_PROMPT]
    for example in sample_examples(config, corpus):
        assert example.annotation is not None
        parts.append(f"DREAM REPORT: {example.text}\n")
        parts.append(f"CHARACTERS: {render_character_line(example.annotation.characters)}\n")
    parts.append(f"### User:\nDREAM REPORT: {target.text}\n### Assistant:\n")
    return "".join(parts)


_ASSISTANT_MARKERS = re.compile(r"(\[CHARACTER\]|\[CHARACTERS\])")


def parse_assistant_output(text: str):
    """Parse "CHARACTERS: [CHARACTER]status is ..., age is ..." assistant
    output into a list of character codes.

    "[CHARACTERS]" is accepted as a separator alias of "[CHARACTER]".  Returns
    a :class:`NullPrediction` with a reason on any deviation from the grammar;
    never raises.
    """
    normalized = " ".join(str(text).split())
    if not normalized.startswith("CHARACTERS:"):
        return NullPrediction(UNKNOWN_MARKER_STRUCTURE)
    rest = normalized[len("CHARACTERS:"):].strip()
    if rest == NO_CHARACTER_SENTENCE:
        return []
    parts = _ASSISTANT_MARKERS.split(rest)
    if parts[0].strip() or len(parts) == 1:
        return NullPrediction(UNKNOWN_MARKER_STRUCTURE)
    codes: list[CharacterCode] = []
    for body in parts[2::2]:
        try:
            codes.append(_lookup_phrases(_split_class_phrases(body.strip(), Strategy.BASELINE)))
        except _DecodeFailure as failure:
            return NullPrediction(failure.reason)
    return codes
