"""Batch command implementations."""
