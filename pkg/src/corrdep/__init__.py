"""Speech depression detection from sliding-window feature-correlation matrices."""

__version__ = "0.1.0"
