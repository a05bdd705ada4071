"""Error-bounded compression and iso-surface extraction for patch-based AMR data."""

__version__ = "0.1.0"
