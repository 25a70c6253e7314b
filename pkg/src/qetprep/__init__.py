"""QET-based quantum state preparation toolkit."""

__version__ = "0.1.0"
