"""Reference blood pressure per beat."""

from reference.bp import beat_bp, bp_series

__all__ = ["beat_bp", "bp_series"]
