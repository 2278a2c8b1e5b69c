"""Graph-constrained regression inference package."""
