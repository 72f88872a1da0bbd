"""Simulator and mechanism library for optimistic-rollup dispute games."""

__version__ = "0.1.0"
