"""Native-sample mixing toolkit for code-mixed hate detection experiments."""

__version__ = "0.1.0"
