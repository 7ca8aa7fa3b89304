"""Reading pmfs and joints from JSON/CSV, and 12-significant-digit output."""

from __future__ import annotations

import csv
import io
import json
from pathlib import Path

import numpy as np

from .channels import JointPmf
from .pmf import Pmf


class ParseError(ValueError):
    """Malformed input; carries a 1-based line and column when known."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        where = "" if line is None else f"line {line}, column {column}: "
        super().__init__(where + message)
        self.line = line
        self.column = column


def sig12(x: float) -> float:
    return float(f"{x:.12g}")


def fmt(x: float) -> str:
    return f"{x:.12g}"


def _is_json(text: str) -> bool:
    return text.lstrip()[:1] in ("[", "{")


def _load_json(text: str):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, exc.colno) from None


def _float(cell: str, line: int, column: int) -> float:
    try:
        return float(cell)
    except ValueError:
        raise ParseError(f"not a number: {cell!r}", line, column) from None


def _csv_rows(text: str) -> list[tuple[int, list[str]]]:
    rows = []
    for lineno, row in enumerate(csv.reader(io.StringIO(text)), start=1):
        if not row or all(not c.strip() for c in row):
            continue
        rows.append((lineno, [c.strip() for c in row]))
    if not rows:
        raise ParseError("no data")
    return rows


def _looks_like_header(cells: list[str]) -> bool:
    try:
        float(cells[0])
        return False
    except ValueError:
        return True


def parse_pmf(text: str, normalize: bool = False) -> Pmf:
    """A JSON array of numbers, or CSV with one probability column and an optional label column."""
    if _is_json(text):
        data = _load_json(text)
        if not isinstance(data, list) or not all(
            isinstance(v, (int, float)) and not isinstance(v, bool) for v in data
        ):
            raise ParseError("expected a JSON array of numbers", 1, 1)
        return Pmf(np.array(data, dtype=float), normalize=normalize)
    rows = _csv_rows(text)
    if _looks_like_header(rows[0][1]):
        rows = rows[1:]
    probs, labels = [], []
    for lineno, cells in rows:
        if len(cells) > 2:
            raise ParseError(f"expected 1 or 2 columns, got {len(cells)}", lineno, 3)
        probs.append(_float(cells[0], lineno, 1))
        if len(cells) == 2:
            labels.append(cells[1])
    if labels and len(labels) != len(probs):
        raise ParseError("label column present on some rows only", rows[0][0], 2)
    return Pmf(np.array(probs), labels=tuple(labels) if labels else None, normalize=normalize)


def parse_joint(text: str) -> JointPmf:
    """A JSON nested array or CSV matrix; rows are x."""
    if _is_json(text):
        data = _load_json(text)
        if not isinstance(data, list) or not data or not all(isinstance(r, list) for r in data):
            raise ParseError("expected a JSON array of arrays", 1, 1)
        widths = {len(r) for r in data}
        if len(widths) != 1:
            raise ParseError("rows differ in length", 1, 1)
        try:
            matrix = np.array(data, dtype=float)
        except (TypeError, ValueError):
            raise ParseError("matrix entries must be numbers", 1, 1) from None
        return JointPmf(matrix)
    rows = _csv_rows(text)
    if _looks_like_header(rows[0][1]):
        rows = rows[1:]
    width = len(rows[0][1])
    matrix = []
    for lineno, cells in rows:
        if len(cells) != width:
            raise ParseError(f"expected {width} columns, got {len(cells)}", lineno, 1)
        matrix.append([_float(c, lineno, col) for col, c in enumerate(cells, start=1)])
    return JointPmf(np.array(matrix))


def read_pmf(path: str | Path, normalize: bool = False) -> Pmf:
    return parse_pmf(Path(path).read_text(), normalize=normalize)


def read_joint(path: str | Path) -> JointPmf:
    return parse_joint(Path(path).read_text())


def dumps(obj) -> str:
    """JSON with every float rounded to 12 significant digits."""

    def clean(v):
        if isinstance(v, bool) or v is None or isinstance(v, str):
            return v
        if isinstance(v, (float, np.floating)):
            v = float(v)
            if v != v or v in (float("inf"), float("-inf")):
                return str(v)
            return sig12(v)
        if isinstance(v, (int, np.integer)):
            return int(v)
        if isinstance(v, dict):
            return {str(k): clean(x) for k, x in v.items()}
        if isinstance(v, (list, tuple)):
            return [clean(x) for x in v]
        return v

    return json.dumps(clean(obj), indent=2) + "\n"
