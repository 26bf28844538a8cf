"""Equilibria of games whose payoffs are known only up to an uncertainty set."""

__version__ = "0.1.0"
