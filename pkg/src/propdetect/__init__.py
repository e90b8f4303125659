"""Sentence- and fragment-level propaganda detection."""

__version__ = "0.1.0"
