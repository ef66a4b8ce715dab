from .cli import build_parser, main
from .manifest import RunManifest

__all__ = ["RunManifest", "build_parser", "main"]
