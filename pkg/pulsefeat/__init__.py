"""Top-level package for the pulsefeat command line."""

__all__ = ["cli"]
