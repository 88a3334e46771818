"""Morris-Shore decomposition of degenerate multilevel ladders."""

__version__ = "0.1.0"
