"""Model-adapter sidecar emitting engine-conformant inference traces."""

from .nli import LexicalEntailment, build_backend
from .runtime import TinyConfig, TinyRuntime
from .server import GenerationInput, create_app

__version__ = "0.1.0"

__all__ = [
    "GenerationInput",
    "LexicalEntailment",
    "TinyConfig",
    "TinyRuntime",
    "build_backend",
    "create_app",
]
