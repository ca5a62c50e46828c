"""Stochastic simulation of reaction networks with unpacked rate laws."""
__version__ = "0.1.0"
