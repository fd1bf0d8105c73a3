"""Spin-squeezing simulator and estimator toolkit for Rydberg-dressed ensembles."""

__version__ = "0.1.0"
