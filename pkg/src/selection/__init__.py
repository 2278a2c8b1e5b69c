"""Tuning-parameter selection."""
