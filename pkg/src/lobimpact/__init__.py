"""Limit-order-book trade reconstruction and universal price impact analysis."""

__version__ = "0.1.0"
