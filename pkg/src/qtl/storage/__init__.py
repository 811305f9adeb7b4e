"""Result files: CSV tables with config headers and gnuplot scripts."""

from qtl.storage.results import ResultStore, format_value, read_table

__all__ = [
    "ResultStore",
    "format_value",
    "read_table",
]
