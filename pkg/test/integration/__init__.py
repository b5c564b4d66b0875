"""Integration tests for real kernel builds."""
