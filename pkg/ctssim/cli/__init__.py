"""Command-line interface for ctssim."""

__all__ = []
