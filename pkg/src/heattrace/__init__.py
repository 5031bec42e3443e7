"""Trace-triple representation of nonnegative heat-equation solutions on an interval."""

__version__ = "0.1.0"
