"""Tests for pulse-features."""
