"""CSV files written by the CLI: '#' header and footer lines around one
comma-separated table."""

from __future__ import annotations

import dataclasses
import os
from typing import Dict, List, Union

import numpy as np

# figure panel -> (CLI command, columns the panel reads)
FIGURE_COLUMNS: Dict[str, tuple] = {
    "fig2a": ("qfi-map", ("g", "tau", "fq")),
    "fig2b": ("qfi-map", ("g", "tau", "fq")),
    "fig2c": ("wigner", ("variant", "q", "p", "W")),
    "fig2d": ("wigner", ("variant", "q", "p", "W")),
    "fig3a": ("qfi-vs-nbar", ("nbar", "fq_max", "fq_limit")),
    "fig3b": ("qfi-vs-nbar", ("nbar", "g_max")),
    "fig4a": ("wigner", ("variant", "q", "p", "W")),
    "fig4b": ("wigner", ("variant", "q", "p", "W")),
    "fig5a": ("fisher-ratio-map", ("chi", "nbar", "ratio")),
    "fig5b": ("fisher-ratio-map", ("chi", "nbar", "phi_star")),
    "fig5c": ("phi-sweep", ("nbar", "phi_lo", "ratio")),
    "fig5d": ("phi-sweep", ("nbar", "phi_lo", "ratio")),
}

_TEXT_COLUMNS = {"variant", "quantity", "theta"}


class SchemaError(ValueError):
    pass


@dataclasses.dataclass
class Table:
    command: str
    columns: Dict[str, np.ndarray]
    config: Dict[str, str]
    resolved: Dict[str, str]
    comments: List[str]

    def __len__(self) -> int:
        return len(next(iter(self.columns.values()))) if self.columns else 0


def _key_value(line: str, prefix: str):
    key, _, value = line[len(prefix):].partition(" = ")
    return key.strip(), value.strip()


def parse(text: str) -> Table:
    comments, lines = [], []
    for line in text.splitlines():
        if not line:
            continue
        (comments if line.startswith("#") else lines).append(line)
    if not lines:
        raise SchemaError("no column line in CSV")
    names = lines[0].split(",")
    cells = [row.split(",") for row in lines[1:]]
    for i, row in enumerate(cells):
        if len(row) != len(names):
            raise SchemaError(f"row {i + 1} has {len(row)} fields, expected {len(names)}")
    columns = {}
    for k, name in enumerate(names):
        values = [row[k] for row in cells]
        if name in _TEXT_COLUMNS:
            columns[name] = np.array(values, dtype=object)
        else:
            columns[name] = np.array([float(v) for v in values], dtype=float)

    command, config, resolved = "", {}, {}
    for line in comments:
        if line.startswith("# command: "):
            command = line[len("# command: "):].strip()
        elif line.startswith("# config: "):
            key, value = _key_value(line, "# config: ")
            config[key] = value
        elif line.startswith("# resolved: "):
            key, value = _key_value(line, "# resolved: ")
            resolved[key] = value
    return Table(command, columns, config, resolved, comments)


def load(path: Union[str, os.PathLike]) -> Table:
    with open(path, encoding="utf-8") as f:
        return parse(f.read())


def require_figure(table: Table, figure_id: str) -> Table:
    """Checks that a table carries what a figure panel plots; raises
    SchemaError naming the missing columns or an empty body."""
    if figure_id not in FIGURE_COLUMNS:
        raise SchemaError(f"unknown figure id {figure_id!r}")
    command, needed = FIGURE_COLUMNS[figure_id]
    missing = [c for c in needed if c not in table.columns]
    if missing:
        raise SchemaError(f"{figure_id} needs columns {', '.join(missing)} (from '{command}')")
    if len(table) == 0:
        raise SchemaError(f"{figure_id}: CSV body is empty")
    return table
