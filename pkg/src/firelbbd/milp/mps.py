"""Fixed-format MPS writer and reader.

Field layout (1-based character columns), as in the classic fixed MPS
standard::

    field 1: 2-3    field 2: 5-12    field 3: 15-22
    field 4: 25-36  field 5: 40-47   field 6: 50-61

Fixed MPS caps names at eight characters, so columns are written as
``C0000001``.. and rows as ``R0000001``..; the objective row is ``OBJ``.
The original names, row groups and model metadata travel in ``*``
comment lines, which other readers skip, so reading our own file gives
back an identical model. Binary columns sit between INTORG/INTEND
markers with explicit ``UP 1`` bounds.
"""

from __future__ import annotations

import json
from fractions import Fraction
from pathlib import Path

from .model import BINARY, CONTINUOUS, MilpModel, ModelError, Row

_SENSE_CODE = {"<=": "L", ">=": "G", "=": "E"}
_CODE_SENSE = {v: k for k, v in _SENSE_CODE.items()}


def _num(v) -> str:
    """Shortest exact-looking rendering that fits the 12-character value field."""
    if isinstance(v, Fraction) and v.denominator == 1:
        v = v.numerator
    if isinstance(v, int):
        s = str(v)
        if len(s) <= 12:
            return s
        v = float(v)
    v = float(v)
    if v.is_integer() and abs(v) < 1e11:
        return str(int(v))
    for digits in range(12, 0, -1):
        s = f"{v:.{digits}g}"
        if len(s) <= 12:
            return s
    raise ModelError(f"cannot fit {v!r} in an MPS value field")


def _line(f1="", f2="", f3="", f4="", f5="", f6="") -> str:
    s = f" {f1:<2} {f2:<8}  {f3:<8}  {f4:>12}"
    if f5 or f6:
        s += f"   {f5:<8}  {f6:>12}"
    return s.rstrip()


def col_code(j: int) -> str:
    return f"C{j + 1:07d}"


def row_code(k: int) -> str:
    return f"R{k + 1:07d}"


def dumps(model: MilpModel, name: str = "FIRELBBD") -> str:
    out = [f"* META {json.dumps(model.metadata, sort_keys=True, default=str)}"]
    for j, col in enumerate(model.columns):
        out.append(f"* COL {col_code(j)} {col.name}")
    for k, row in enumerate(model.rows):
        out.append(f"* ROW {row_code(k)} {row.name}" + (f" {row.group}" if row.group else ""))
    out.append(f"NAME          {name[:8]}")
    out.append("ROWS")
    out.append(_line("N", "OBJ"))
    for k, row in enumerate(model.rows):
        out.append(_line(_SENSE_CODE[row.sense], row_code(k)))
    out.append("COLUMNS")
    by_col: list[list] = [[] for _ in model.columns]
    for k, row in enumerate(model.rows):
        for j, c in row.terms.items():
            by_col[j].append((row_code(k), c))
    in_int = False
    marker = 0
    for j, col in enumerate(model.columns):
        is_int = col.kind == BINARY
        if is_int != in_int:
            tag = "'INTORG'" if is_int else "'INTEND'"
            out.append(f"    M{marker:07d}  'MARKER'                 {tag}")
            marker += 1
            in_int = is_int
        entries = ([("OBJ", col.obj)] if col.obj else []) + sorted(by_col[j])
        if not entries:
            entries = [("OBJ", 0)]
        for i in range(0, len(entries), 2):
            pair = entries[i:i + 2]
            if len(pair) == 2:
                out.append(_line("", col_code(j), pair[0][0], _num(pair[0][1]), pair[1][0], _num(pair[1][1])))
            else:
                out.append(_line("", col_code(j), pair[0][0], _num(pair[0][1])))
    if in_int:
        out.append(f"    M{marker:07d}  'MARKER'                 'INTEND'")
    out.append("RHS")
    for k, row in enumerate(model.rows):
        if row.rhs != 0:
            out.append(_line("", "RHS", row_code(k), _num(row.rhs)))
    out.append("BOUNDS")
    for j, col in enumerate(model.columns):
        code = col_code(j)
        if col.lower == col.upper:
            out.append(_line("FX", "BND", code, _num(col.lower)))
            continue
        if col.lower != 0:
            out.append(_line("LO", "BND", code, _num(col.lower)))
        out.append(_line("UP", "BND", code, _num(col.upper)))
    out.append("ENDATA")
    return "\n".join(out) + "\n"


def _parse_num(s: str):
    try:
        return int(s)
    except ValueError:
        f = float(s)
        return int(f) if f.is_integer() else f


def loads(text: str) -> MilpModel:
    meta = {}
    col_names: dict[str, str] = {}
    row_names: dict[str, tuple] = {}
    section = None
    row_order: list[str] = []
    senses: dict[str, str] = {}
    col_order: list[str] = []
    col_kind: dict[str, str] = {}
    col_obj: dict[str, object] = {}
    terms: dict[str, dict] = {}
    rhs: dict[str, object] = {}
    bounds: dict[str, list] = {}
    integer = False
    obj_name = None
    for raw in text.splitlines():
        if not raw.strip():
            continue
        if raw.startswith("*"):
            parts = raw[1:].strip().split(" ", 1)
            if parts[0] == "META":
                meta = json.loads(parts[1])
            elif parts[0] == "COL":
                code, name = parts[1].split(" ", 1)
                col_names[code] = name
            elif parts[0] == "ROW":
                bits = parts[1].split(" ")
                row_names[bits[0]] = (bits[1], bits[2] if len(bits) > 2 else None)
            continue
        if not raw[0].isspace():
            section = raw.split()[0]
            continue
        f = raw.split()
        if section == "ROWS":
            code, name = f
            if code == "N":
                obj_name = obj_name or name
                continue
            row_order.append(name)
            senses[name] = _CODE_SENSE[code]
        elif section == "COLUMNS":
            if len(f) >= 3 and f[1] == "'MARKER'":
                integer = f[2] == "'INTORG'"
                continue
            col = f[0]
            if col not in col_kind:
                col_order.append(col)
                col_kind[col] = BINARY if integer else CONTINUOUS
                terms[col] = {}
            for r, v in zip(f[1::2], f[2::2]):
                if r == obj_name:
                    col_obj[col] = _parse_num(v)
                else:
                    terms[col][r] = _parse_num(v)
        elif section == "RHS":
            for r, v in zip(f[1::2], f[2::2]):
                rhs[r] = _parse_num(v)
        elif section == "BOUNDS":
            kind, _, col = f[:3]
            val = _parse_num(f[3]) if len(f) > 3 else None
            bounds.setdefault(col, []).append((kind, val))
        elif section == "ENDATA":
            break
    model = MilpModel(metadata=meta)
    for col in col_order:
        kind = col_kind[col]
        lower, upper = 0, (1 if kind == BINARY else float("inf"))
        for b, v in bounds.get(col, []):
            if b == "UP":
                upper = v
            elif b == "LO":
                lower = v
            elif b == "FX":
                lower = upper = v
            elif b == "BV":
                lower, upper, kind = 0, 1, BINARY
            else:
                raise ModelError(f"unsupported bound type {b}")
        model.add_column(col_names.get(col, col), kind, lower, upper, col_obj.get(col, 0))
    index = {code: j for j, code in enumerate(col_order)}
    row_terms: dict[str, dict] = {r: {} for r in row_order}
    for col, entries in terms.items():
        for r, v in entries.items():
            row_terms[r][index[col]] = v
    for r in row_order:
        name, group = row_names.get(r, (r, None))
        model.add_row(name, senses[r], rhs.get(r, 0), dict(sorted(row_terms[r].items())), group)
    return model


def write(model: MilpModel, path) -> None:
    Path(path).write_text(dumps(model))


def read(path) -> MilpModel:
    return loads(Path(path).read_text())
