"""Noncoherent M-FSK analog network coding over the two-way relay channel."""

__version__ = "0.1.0"
