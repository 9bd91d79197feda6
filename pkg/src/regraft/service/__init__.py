"""HTTP service over the engine, plus the operations layer the CLI shares."""

from .app import create_app

__all__ = ["create_app"]
