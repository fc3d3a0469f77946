"""Single-spin MRFM baseband detection: telegraph model, detectors, Monte Carlo harness."""

__version__ = "0.1.0"
