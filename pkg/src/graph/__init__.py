"""Graphs, penalty matrices and graph perturbation."""
