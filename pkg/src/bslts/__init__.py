"""Symbolic labelled transition systems for finite Event-B models."""

__version__ = "0.1.0"
