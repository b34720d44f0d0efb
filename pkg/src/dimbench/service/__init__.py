"""HTTP service exposing the benchmark operations; the CLI is its client."""

from .app import create_app

__all__ = ["create_app"]
