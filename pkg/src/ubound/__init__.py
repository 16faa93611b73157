"""Moment and tail bounds for normalized multi-index sums of nonnegative
kernels, plus an empirical verifier for those bounds."""

__version__ = "0.1.0"

SCHEMA_VERSION = "ubound/1"
