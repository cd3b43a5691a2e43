"""shelfguide: verbal fine-grain manipulation guidance toolkit."""

__version__ = "0.1.0"
