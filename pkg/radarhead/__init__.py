"""Radar head-movement toolkit: FMCW simulation, range spectra and one-shot classification."""

__version__ = "1.0.0"
