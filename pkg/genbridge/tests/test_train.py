from __future__ import annotations

import json

import pytest

from genbridge.config import ConfigMismatch, TrainConfig
from genbridge.train import LOG_FILE, finetune


def read_losses(checkpoint) -> list[float]:
    return json.loads((checkpoint / LOG_FILE).read_text())["epoch_losses"]


def test_toy_set_trains_and_loss_decreases_monotonically(tiny_base, toy_pairs_path, tmp_path):
    # reference hyperparameters: batch 16, lr 3e-4, 15 epochs
    config = TrainConfig(base=str(tiny_base))
    checkpoint = finetune(toy_pairs_path, config, tmp_path / "out")
    losses = read_losses(checkpoint)
    assert len(losses) == 15
    assert all(later < earlier for earlier, later in zip(losses, losses[1:]))
    assert losses[-1] < losses[0]
    assert (checkpoint / "train_config.json").exists()


def test_training_is_deterministic_given_seed(tiny_base, toy_pairs_path, tmp_path):
    config = TrainConfig(base=str(tiny_base), epochs=3, seed=11)
    first = read_losses(finetune(toy_pairs_path, config, tmp_path / "one"))
    second = read_losses(finetune(toy_pairs_path, config, tmp_path / "two"))
    assert first == second
    different = TrainConfig(base=str(tiny_base), epochs=3, seed=12)
    assert read_losses(finetune(toy_pairs_path, different, tmp_path / "three")) != first


def test_resume_refuses_mismatched_config(tiny_base, toy_pairs_path, tmp_path):
    outdir = tmp_path / "ckpt"
    config = TrainConfig(base=str(tiny_base), epochs=2)
    finetune(toy_pairs_path, config, outdir)
    with pytest.raises(ConfigMismatch):
        finetune(toy_pairs_path, TrainConfig(base=str(tiny_base), epochs=2, learning_rate=1e-3), outdir)


def test_resume_continues_under_identical_config(tiny_base, toy_pairs_path, tmp_path):
    outdir = tmp_path / "ckpt"
    config = TrainConfig(base=str(tiny_base), epochs=2)
    first_losses = read_losses(finetune(toy_pairs_path, config, outdir))
    resumed_losses = read_losses(finetune(toy_pairs_path, config, outdir))
    # the second run starts from the first run's weights, so it starts lower
    assert resumed_losses[0] < first_losses[0]


def test_data_errors_surface_with_line_numbers(tiny_base, tmp_path):
    path = tmp_path / "pairs.jsonl"
    path.write_text('{"id": "a", "source": "s", "target": "t"}\nbroken\n')
    from genbridge.data import DataFormatError

    with pytest.raises(DataFormatError) as excinfo:
        finetune(path, TrainConfig(base=str(tiny_base), epochs=1), tmp_path / "out")
    assert excinfo.value.line == 2
