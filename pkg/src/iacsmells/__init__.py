"""Polyglot code smell detection for Infrastructure-as-Code scripts."""

__version__ = "0.1.0"
