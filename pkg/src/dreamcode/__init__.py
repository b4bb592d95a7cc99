"""Character and emotion coding of dream narratives.

Code grammar and parsing (:mod:`dreamcode.codes`), natural-language target
texts with strict decoding (:mod:`dreamcode.serialization`), multiset F1
evaluation and paired significance (:mod:`dreamcode.evaluation`), corpus
handling and splits (:mod:`dreamcode.dataset`), few-shot prompting
(:mod:`dreamcode.prompts`) and the model-agnostic run pipeline
(:mod:`dreamcode.pipeline`, :mod:`dreamcode.backends`).
"""

from .codes import (
    AgeClass,
    AnnotationSet,
    CharacterCode,
    CodeError,
    DREAMER,
    EmotionLabel,
    EmotionRecord,
    GenderClass,
    IdentityClass,
    RawCode,
    StatusClass,
    describe,
    format_character_code,
    merge_raw_code,
    parse_character_code,
    parse_emotion_token,
)
from .serialization import (
    LayoutPolicy,
    NullPrediction,
    OrderPolicy,
    Strategy,
    decode,
    encode,
    reorder,
)
from .evaluation import (
    MatchCounts,
    MetricReport,
    SeriesReport,
    aggregate_micro,
    macro_average,
    score_narrative,
    wilcoxon_signed_rank,
)
from .dataset import (
    Corpus,
    EntitySpan,
    NarrativeRecord,
    SplitPlan,
    anonymize_names,
    corpus_stats,
    filter_max_characters,
    kfold_cross_series,
    leave_one_series_out,
    load_corpus,
)
from .prompts import PromptConfig, build_prompt, parse_assistant_output

__version__ = "0.1.0"

__all__ = [
    "AgeClass",
    "AnnotationSet",
    "CharacterCode",
    "CodeError",
    "Corpus",
    "DREAMER",
    "EmotionLabel",
    "EmotionRecord",
    "EntitySpan",
    "GenderClass",
    "IdentityClass",
    "LayoutPolicy",
    "MatchCounts",
    "MetricReport",
    "NarrativeRecord",
    "NullPrediction",
    "OrderPolicy",
    "PromptConfig",
    "RawCode",
    "SeriesReport",
    "SplitPlan",
    "StatusClass",
    "Strategy",
    "aggregate_micro",
    "anonymize_names",
    "build_prompt",
    "corpus_stats",
    "decode",
    "describe",
    "encode",
    "filter_max_characters",
    "format_character_code",
    "kfold_cross_series",
    "leave_one_series_out",
    "load_corpus",
    "macro_average",
    "merge_raw_code",
    "parse_assistant_output",
    "parse_character_code",
    "parse_emotion_token",
    "reorder",
    "score_narrative",
    "wilcoxon_signed_rank",
]
