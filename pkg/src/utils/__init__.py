"""Logging, number formatting and ordered parallel map helpers."""
