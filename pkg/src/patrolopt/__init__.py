"""Route planning toolkit for multi-vehicle patrol on graphs with growing vertex costs."""

__version__ = "0.1.0"
