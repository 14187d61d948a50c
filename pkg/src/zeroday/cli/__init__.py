from .app import build_parser, main
from .config import Command, RunConfig, validate

__all__ = ["Command", "RunConfig", "build_parser", "main", "validate"]
