"""Soccer knowledge graph construction and querying."""

__version__ = "0.1.0"
