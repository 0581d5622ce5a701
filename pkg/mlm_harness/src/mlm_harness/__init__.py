"""Fine-tuning harness for multilingual encoders on hate detection jobs."""

__version__ = "0.1.0"
