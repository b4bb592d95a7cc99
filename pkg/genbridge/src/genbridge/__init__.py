"""Reference generation backend: fine-tune an encoder-decoder checkpoint on
narrative-to-target-text pairs and serve greedy generations over the
pipe/HTTP request-response contract."""

from .config import ConfigMismatch, DEFAULT_CHECKPOINT, SIZE_CHECKPOINTS, TrainConfig
from .data import DataFormatError, Pair, load_pairs
from .serve import Generator, make_http_server, serve_http, serve_pipe
from .train import finetune

__version__ = "0.1.0"

__all__ = [
    "ConfigMismatch",
    "DEFAULT_CHECKPOINT",
    "DataFormatError",
    "Generator",
    "Pair",
    "SIZE_CHECKPOINTS",
    "TrainConfig",
    "finetune",
    "load_pairs",
    "make_http_server",
    "serve_http",
    "serve_pipe",
]
