"""Multi-robot dialogue planning with retrospective critique."""

__version__ = "0.1.0"
