"""Tool-grounded multi-agent molecular optimization engine."""

__version__ = "0.1.0"
