"""Claim-level healthcare fraud detection on Medicare-style claim tables."""
from ._accel import backend_name
from .errors import DataWarning, UsageError

__version__ = "0.1.0"

__all__ = ["DataWarning", "UsageError", "__version__", "backend_name"]
