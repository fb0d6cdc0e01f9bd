"""Desk-scale backtesting engine for quantum, hybrid, and classical
rebalance-signal models on daily OHLCV data."""

__version__ = "0.1.0"
