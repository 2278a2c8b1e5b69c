"""Readers for numeric CSV and edge-list inputs."""
