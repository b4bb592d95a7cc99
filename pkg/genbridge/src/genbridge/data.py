"""Training pairs: newline-delimited ``{"id", "source", "target"}`` records,
the encode command's output format."""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Union


class DataFormatError(ValueError):
    def __init__(self, line: int, message: str):
        super().__init__(f"line {line}: {message}")
        self.line = line


@dataclass(frozen=True)
class Pair:
    id: str
    source: str
    target: str


def load_pairs(path: Union[str, Path]) -> list[Pair]:
    """Load and validate a pairs file; any malformed line fails loudly with
    its line number."""
    pairs = []
    for line_number, line in enumerate(
        Path(path).read_text(encoding="utf-8").splitlines(), start=1
    ):
        line = line.strip()
        if not line:
            continue
        try:
            payload = json.loads(line)
        except json.JSONDecodeError as err:
            raise DataFormatError(line_number, f"invalid JSON: {err}") from err
        if not isinstance(payload, dict):
            raise DataFormatError(line_number, "record must be a JSON object")
        for key in ("id", "source", "target"):
            if not isinstance(payload.get(key), str):
                raise DataFormatError(line_number, f"field {key!r} must be a string")
        pairs.append(Pair(payload["id"], payload["source"], payload["target"]))
    if not pairs:
        raise DataFormatError(0, "no training pairs found")
    return pairs
