from __future__ import annotations

import json
import subprocess
import sys

import pytest
import transformers
from tokenizers import Tokenizer
from tokenizers.models import WordLevel
from tokenizers.pre_tokenizers import WhitespaceSplit
from tokenizers.processors import TemplateProcessing
from transformers import PreTrainedTokenizerFast, T5Config, T5ForConditionalGeneration

from genbridge.config import TrainConfig
from genbridge.train import finetune

transformers.utils.logging.set_verbosity_error()
transformers.utils.logging.disable_progress_bar()

DREAMCODE = [sys.executable, "-m", "dreamcode.cli"]

# Ten narratives across two series; names are unique per narrative so a tiny
# model can tell them apart. One narrative has no characters and no emotions.
TOY_RECORDS = [
    ("pine-0", "pine", "ada met bruno by the lake", ["1FKA", "1MSA"], [("1FKA", "HA")]),
    ("pine-1", "pine", "a crowd of boys chased carol", ["2MSC", "1FSC"], [("D", "AP")]),
    ("pine-2", "pine", "dora argued with elena all night", ["1FKA", "1FKA"], [("D", "AN")]),
    ("pine-3", "pine", "nothing much happened in this dream", [], []),
    ("pine-4", "pine", "felix turned into a shadow form", ["8JPA"], [("8JPA", "SD")]),
    ("oak-0", "oak", "gina saw an imaginary child wandering", ["5IEC"], [("D", "CO")]),
    ("oak-1", "oak", "harold and his late uncle visited", ["1MKA", "3MKA"], [("D", "SD")]),
    ("oak-2", "oak", "a group of strangers waved at iris", ["2ISA", "1FKC"], [("1FKC", "HA")]),
    ("oak-3", "oak", "jonas lost his keys twice", ["1MSA"], [("D", "CO")]),
    ("oak-4", "oak", "kara dreamed of famous singers performing", ["2FPA"], [("D", "HA")]),
]


def gold_annotation(record) -> dict:
    _, _, _, characters, emotions = record
    return {
        "characters": sorted(characters),
        "emotions": sorted(f"{who} {emotion}" for who, emotion in emotions),
    }


@pytest.fixture(scope="session")
def toy_corpus_path(tmp_path_factory):
    path = tmp_path_factory.mktemp("toy") / "corpus.jsonl"
    lines = []
    for record_id, series, text, characters, emotions in TOY_RECORDS:
        lines.append(json.dumps({
            "id": record_id,
            "series": series,
            "text": text,
            "characters": characters,
            "emotions": [{"who": who, "emotion": emotion} for who, emotion in emotions],
        }))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


@pytest.fixture(scope="session")
def toy_pairs_path(toy_corpus_path, tmp_path_factory):
    """Training pairs produced by the primary's encode command."""
    path = tmp_path_factory.mktemp("pairs") / "pairs.jsonl"
    subprocess.run(
        DREAMCODE + ["encode", str(toy_corpus_path), "-o", str(path),
                     "--strategy", "no-semantics"],
        check=True,
    )
    return path


@pytest.fixture(scope="session")
def tiny_base(toy_pairs_path, tmp_path_factory):
    """A miniature randomly initialized encoder-decoder checkpoint whose
    word-level vocabulary covers the toy task."""
    words: set[str] = set()
    for line in toy_pairs_path.read_text(encoding="utf-8").splitlines():
        payload = json.loads(line)
        words.update(payload["source"].split())
        words.update(payload["target"].split())
    vocab = {"<pad>": 0, "</s>": 1, "<unk>": 2}
    for word in sorted(words):
        vocab[word] = len(vocab)

    tokenizer = Tokenizer(WordLevel(vocab, unk_token="<unk>"))
    tokenizer.pre_tokenizer = WhitespaceSplit()
    tokenizer.post_processor = TemplateProcessing(
        single="$A </s>", special_tokens=[("</s>", 1)]
    )
    fast = PreTrainedTokenizerFast(
        tokenizer_object=tokenizer, pad_token="<pad>", eos_token="</s>", unk_token="<unk>"
    )
    config = T5Config(
        vocab_size=len(vocab),
        d_model=128,
        d_kv=32,
        d_ff=256,
        num_layers=2,
        num_heads=4,
        dropout_rate=0.0,
        decoder_start_token_id=0,
        pad_token_id=0,
        eos_token_id=1,
    )
    import torch

    torch.manual_seed(1234)
    model = T5ForConditionalGeneration(config)
    outdir = tmp_path_factory.mktemp("base") / "tiny-t5"
    fast.save_pretrained(outdir)
    model.save_pretrained(outdir)
    return outdir


# Enough optimization for a tiny random-init model to memorize ten pairs;
# deliberately NOT the reference fine-tuning defaults (see test_acceptance).
OVERFIT_CONFIG = dict(epochs=300, learning_rate=3e-3, batch_size=16, seed=7)


@pytest.fixture(scope="session")
def overfit_checkpoint(tiny_base, toy_pairs_path, tmp_path_factory):
    outdir = tmp_path_factory.mktemp("ckpt") / "overfit"
    config = TrainConfig(base=str(tiny_base), **OVERFIT_CONFIG)
    return finetune(toy_pairs_path, config, outdir)
