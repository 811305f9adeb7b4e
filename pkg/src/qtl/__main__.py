"""
Entry point for running the CLI as a module.

Usage:
    python -m qtl <command>
"""

from qtl.cli.commands import cli

if __name__ == "__main__":
    cli()
