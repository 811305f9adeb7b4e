"""Command-line interface."""

from qtl.cli.commands import cli

__all__ = ["cli"]
