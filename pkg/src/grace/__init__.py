"""Factored penalized estimators."""
