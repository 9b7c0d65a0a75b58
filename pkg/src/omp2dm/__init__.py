"""OpenMP ``parallel for`` to master/worker message-passing translation."""

__version__ = "0.1.0"
