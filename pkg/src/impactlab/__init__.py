"""Call-graph-based change impact prediction measured against mutation testing."""

__version__ = "0.1.0"
