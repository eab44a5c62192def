"""Regime mapping for balanced LIF networks with delays and E->E STDP."""

__version__ = "0.1.0"
