"""Readers for the data files the eprgate CLI emits.

Every reader validates the header against the schema its plot kind needs and
reports the offending column by name; values come back as parsed floats so
sidecar files can mirror the source columns exactly.
"""

from __future__ import annotations

from pathlib import Path

ROW_COLUMNS = (
    "target_db", "epr_db", "R", "gx", "gp",
    "fidelity", "sq_out_db", "antisq_out_db", "mc_fidelity", "mc_stderr",
)
STATE_COLUMNS = ("label", "source", "mu_x", "mu_p", "v_xx", "v_xp", "v_pp")
WIGNER_COLUMNS = ("x", "p", "w")

STATE_TEXT_COLUMNS = ("label", "source")


class SchemaError(ValueError):
    """Input file does not match the schema the plot kind expects."""


def _read_csv(path, required, text_columns=()):
    path = Path(path)
    lines = path.read_text().strip().splitlines()
    if not lines:
        raise SchemaError(f"{path}: empty file")
    header = lines[0].split(",")
    for column in required:
        if column not in header:
            raise SchemaError(f"{path}: missing column {column!r}")
    rows = []
    for number, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != len(header):
            raise SchemaError(f"{path}:{number}: expected {len(header)} cells, got {len(cells)}")
        row = {}
        for key, cell in zip(header, cells):
            if key in text_columns:
                row[key] = cell
            elif cell == "":
                row[key] = None
            else:
                try:
                    row[key] = float(cell)
                except ValueError:
                    raise SchemaError(f"{path}:{number}: column {key!r} is not numeric: {cell!r}")
        rows.append(row)
    if not rows:
        raise SchemaError(f"{path}: no data rows")
    return rows


def read_sweep(path) -> list[dict]:
    """Rows of the gate/sweep schema (mc columns may be None)."""
    return _read_csv(path, ROW_COLUMNS)


def read_states(path) -> list[dict]:
    """Rows of the reconstructed-state schema (one state per row)."""
    return _read_csv(path, STATE_COLUMNS, text_columns=STATE_TEXT_COLUMNS)


def read_wigner(path) -> dict:
    """A phase-space grid as flat x, p, w columns plus the unique axes."""
    rows = _read_csv(path, WIGNER_COLUMNS)
    xs = [row["x"] for row in rows]
    ps = [row["p"] for row in rows]
    ws = [row["w"] for row in rows]
    x_axis = sorted(set(xs))
    p_axis = sorted(set(ps))
    if len(x_axis) * len(p_axis) != len(rows):
        raise SchemaError(f"{path}: rows do not form a rectangular grid")
    return {"x": xs, "p": ps, "w": ws, "x_axis": x_axis, "p_axis": p_axis}
