"""Streaming session-based news recommendation engine and evaluation harness."""

__version__ = "0.1.0"
