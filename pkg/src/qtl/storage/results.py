"""
CSV result files with reproducibility headers.

Every file starts with comment lines naming the tool version, the
experiment kind, the seed(s) and the full resolved config, followed by one
column-header row and the data. Nothing time-dependent is written, so a
re-run from the embedded config reproduces the file byte for byte.
"""

import csv
import io
from pathlib import Path
from typing import Any, Iterable, Optional, Sequence

import numpy as np
import structlog

from qtl import __version__
from qtl.core.exceptions import StorageError
from qtl.core.schemas import CONFIG_HEADER

logger = structlog.get_logger(__name__)


def format_value(value: Any) -> str:
    """Deterministic text for one cell."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".12g")
    if value is None:
        return "nan"
    return str(value)


class ResultStore:
    """
    Writes result tables and plot scripts into one output directory.

    File names follow ``<scenario>_<kind>[_seed<N>].<ext>``.
    """

    def __init__(self, output_dir: str | Path, scenario: str, config_json: str):
        self.output_dir = Path(output_dir)
        self.scenario = scenario
        self.config_json = config_json
        self.written: list[Path] = []

    def path_for(
        self,
        kind: str,
        seed: Optional[int] = None,
        suffix: str = ".csv",
        tag: Optional[str] = None,
    ) -> Path:
        stem = f"{self.scenario}_{kind}"
        if seed is not None:
            stem += f"_seed{seed}"
        if tag:
            stem += f"_{tag}"
        return self.output_dir / f"{stem}{suffix}"

    def header_lines(self, kind: str, seed: int | Sequence[int] | None) -> list[str]:
        if seed is None:
            seed_text = "-"
        elif isinstance(seed, (int, np.integer)):
            seed_text = str(int(seed))
        else:
            seed_text = " ".join(str(int(s)) for s in seed)
        return [
            f"# qtl {__version__}",
            f"# kind: {kind}",
            f"# seed: {seed_text}",
            f"{CONFIG_HEADER}{self.config_json}",
        ]

    def render_table(
        self,
        kind: str,
        columns: Sequence[str],
        rows: Iterable[Sequence[Any]],
        seed: int | Sequence[int] | None = None,
    ) -> str:
        buffer = io.StringIO()
        for line in self.header_lines(kind, seed):
            buffer.write(line + "\n")
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([format_value(value) for value in row])
        return buffer.getvalue()

    def write_table(
        self,
        kind: str,
        columns: Sequence[str],
        rows: Iterable[Sequence[Any]],
        seed: Optional[int] = None,
        file_kind: Optional[str] = None,
        header_seed: int | Sequence[int] | None = None,
        tag: Optional[str] = None,
    ) -> Path:
        """
        Write one CSV table.

        Args:
            kind: Experiment kind recorded in the header
            columns: Column names
            rows: Data rows
            seed: Seed appended to the file name (per-run files)
            file_kind: File-name kind when it differs from ``kind``
            header_seed: Seed(s) recorded in the header (default: ``seed``)
            tag: Extra file-name suffix, e.g. the initial-state index
        """
        path = self.path_for(file_kind or kind, seed, tag=tag)
        text = self.render_table(kind, columns, rows, seed if header_seed is None else header_seed)
        return self._write(path, text)

    def write_key_values(
        self,
        kind: str,
        rows: Iterable[tuple[str, Any]],
        file_kind: Optional[str] = None,
        header_seed: int | Sequence[int] | None = None,
    ) -> Path:
        """Write a two-column key,value CSV."""
        return self.write_table(kind, ["key", "value"], rows, file_kind=file_kind, header_seed=header_seed)

    def write_script(self, kind: str, script: str, seed: int | Sequence[int] | None = None) -> Path:
        """Write a gnuplot script next to the data it references, behind the same header."""
        header = "".join(line + "\n" for line in self.header_lines(kind, seed))
        return self._write(self.path_for(kind, suffix=".gp"), header + script)

    def _write(self, path: Path, text: str) -> Path:
        try:
            path.parent.mkdir(parents=True, exist_ok=True)
            path.write_text(text, encoding="utf-8", newline="\n")
        except OSError as e:
            raise StorageError(
                f"Could not write {path}: {e.strerror or e}",
                path=str(path),
                operation="write",
                cause=e,
            ) from e
        self.written.append(path)
        logger.debug("Result written", path=str(path), bytes=len(text))
        return path


def read_table(path: str | Path) -> tuple[list[str], np.ndarray]:
    """
    Read back a numeric result table: (columns, data).

    Empty or ``nan`` cells come back as nan.
    """
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as handle:
            lines = [line for line in handle if not line.startswith("#")]
    except OSError as e:
        raise StorageError(f"Could not read {path}", path=str(path), operation="read", cause=e) from e
    if not lines:
        raise StorageError(f"No column header in {path}", path=str(path), operation="read")
    columns = next(csv.reader(lines[:1]))
    if len(lines) == 1:
        return columns, np.empty((0, len(columns)))
    data = np.genfromtxt(lines[1:], delimiter=",", dtype=np.float64, ndmin=2)
    return columns, data.reshape(-1, len(columns))
