"""Test statistics, bounds, p-values and corrections."""
