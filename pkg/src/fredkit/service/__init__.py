"""HTTP service layer: FastAPI app plus request/response schemas."""

from .app import create_app

__all__ = ["create_app"]
