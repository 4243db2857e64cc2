"""Cross-language misuse detection for native extensions."""

__version__ = "0.1.0"
