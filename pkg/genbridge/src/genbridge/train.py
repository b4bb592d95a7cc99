"""Fine-tuning loop for an encoder-decoder checkpoint on training pairs."""

from __future__ import annotations

import json
import logging
import random
from pathlib import Path
from typing import Union

import torch
from transformers import AutoModelForSeq2SeqLM, AutoTokenizer

from .config import ConfigMismatch, TrainConfig
from .data import Pair, load_pairs

log = logging.getLogger(__name__)

CONFIG_FILE = "train_config.json"
LOG_FILE = "training_log.json"


def _batches(pairs: list[Pair], batch_size: int, rng: random.Random):
    order = list(range(len(pairs)))
    rng.shuffle(order)
    for start in range(0, len(order), batch_size):
        yield [pairs[i] for i in order[start : start + batch_size]]


def _encode_batch(tokenizer, batch: list[Pair], config: TrainConfig):
    sources = tokenizer(
        [p.source for p in batch],
        return_tensors="pt",
        padding=True,
        truncation=True,
        max_length=config.max_source_length,
    )
    targets = tokenizer(
        [p.target for p in batch],
        return_tensors="pt",
        padding=True,
        truncation=True,
        max_length=config.max_target_length,
    )
    labels = targets["input_ids"].clone()
    labels[labels == tokenizer.pad_token_id] = -100
    return sources, labels


def _check_resumable(outdir: Path, config: TrainConfig) -> bool:
    """True when ``outdir`` holds a checkpoint to resume from; raises on a
    configuration mismatch."""
    config_path = outdir / CONFIG_FILE
    if not config_path.exists():
        return False
    previous = TrainConfig.from_file(config_path)
    if previous != config:
        raise ConfigMismatch(
            f"{outdir} was trained with {previous}, refusing to resume with {config}"
        )
    return (outdir / "config.json").exists()


def finetune(
    pairs_path: Union[str, Path], config: TrainConfig, outdir: Union[str, Path]
) -> Path:
    """Fine-tune ``config.base`` on a pairs file and save the checkpoint,
    tokenizer, config and per-epoch loss log into ``outdir``.

    Re-running into the same directory resumes from its weights, but only
    under an identical configuration.
    """
    outdir = Path(outdir)
    pairs = load_pairs(pairs_path)
    resume = _check_resumable(outdir, config)
    source = str(outdir) if resume else config.base

    torch.manual_seed(config.seed)
    rng = random.Random(config.seed)
    tokenizer = AutoTokenizer.from_pretrained(source)
    model = AutoModelForSeq2SeqLM.from_pretrained(source)
    model.train()
    optimizer = torch.optim.AdamW(model.parameters(), lr=config.learning_rate)

    epoch_losses = []
    for epoch in range(config.epochs):
        total = 0.0
        steps = 0
        for batch in _batches(pairs, config.batch_size, rng):
            sources, labels = _encode_batch(tokenizer, batch, config)
            loss = model(
                input_ids=sources["input_ids"],
                attention_mask=sources["attention_mask"],
                labels=labels,
            ).loss
            loss.backward()
            optimizer.step()
            optimizer.zero_grad()
            total += loss.item()
            steps += 1
        epoch_losses.append(total / steps)
        log.info("epoch %d/%d: loss %.4f", epoch + 1, config.epochs, epoch_losses[-1])

    outdir.mkdir(parents=True, exist_ok=True)
    model.save_pretrained(outdir)
    tokenizer.save_pretrained(outdir)
    config.save(outdir / CONFIG_FILE)
    (outdir / LOG_FILE).write_text(
        json.dumps({"pairs": len(pairs), "epoch_losses": epoch_losses}, indent=2) + "\n",
        encoding="utf-8",
    )
    return outdir
