"""Spot/on-demand replica serving simulator with the SpotHedge policy and its baselines."""

__version__ = "0.1.0"
