"""forestbench: deterministic synthetic-forest mission workbench."""

__version__ = "0.1.0"
