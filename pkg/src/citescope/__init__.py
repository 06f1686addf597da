"""Citation-graph-aware scientific information extraction toolkit."""

__version__ = "0.1.0"
