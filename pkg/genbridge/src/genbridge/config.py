"""Training configuration, stored as a flat JSON file next to checkpoints."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Union

# Checkpoint ids by model-size class (77M / 248M / 783M parameters).
SIZE_CHECKPOINTS = {
    "small": "MBZUAI/LaMini-Flan-T5-77M",
    "base": "MBZUAI/LaMini-Flan-T5-248M",
    "large": "MBZUAI/LaMini-Flan-T5-783M",
}

DEFAULT_CHECKPOINT = SIZE_CHECKPOINTS["base"]


class ConfigMismatch(ValueError):
    """A checkpoint directory was trained under a different configuration."""


@dataclass(frozen=True)
class TrainConfig:
    base: str = DEFAULT_CHECKPOINT
    batch_size: int = 16
    learning_rate: float = 3e-4
    epochs: int = 15
    max_source_length: int = 512
    max_target_length: int = 256
    seed: int = 0

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, payload: dict) -> "TrainConfig":
        known = set(cls.__dataclass_fields__)
        unknown = set(payload) - known
        if unknown:
            raise ValueError(f"unknown config fields: {sorted(unknown)}")
        return cls(**payload)

    @classmethod
    def from_file(cls, path: Union[str, Path]) -> "TrainConfig":
        return cls.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))

    def save(self, path: Union[str, Path]) -> None:
        Path(path).write_text(
            json.dumps(self.to_dict(), indent=2) + "\n", encoding="utf-8"
        )
