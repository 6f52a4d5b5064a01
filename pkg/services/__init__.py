"""Numerical services behind the CLI commands."""
