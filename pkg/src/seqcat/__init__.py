"""Categories, plans and processes for meaningful sequences."""

__version__ = "0.1.0"
