"""Standardization, lasso and scaled-lasso solvers."""
