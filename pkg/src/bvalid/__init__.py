"""Check tabular configuration data against rules written in B notation."""

__version__ = "0.1.0"
