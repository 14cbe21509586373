"""HTTP service exposing the toolkit: pydantic schemas, handlers, FastAPI app."""

from .app import create_app

__all__ = ["create_app"]
