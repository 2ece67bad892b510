"""Frequency-bin quantum extreme learning machine with stimulated-emission training."""
__version__ = "0.1.0"
