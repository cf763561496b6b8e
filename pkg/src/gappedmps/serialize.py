"""JSON/CSV I/O for tuples and structured tensor data.

Complex numbers are stored as two-element [re, im] arrays; floats round-trip
bitwise (shortest-repr JSON encoding, 17 significant digits in CSV).  Schema
violations raise SchemaError carrying the JSON pointer of the first offender.
"""

from __future__ import annotations

import csv
import json
import numbers
from dataclasses import replace

import numpy as np

from .canonical import ClassAData, assemble_tensor, check_structure
from .errors import IoError, SchemaError
from .mps import MpsTuple


def _pair(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _matrix_out(M) -> list:
    M = np.asarray(M, dtype=complex)
    return [[_pair(z) for z in row] for row in M]


def _expect(obj, key, ptr):
    if not isinstance(obj, dict):
        raise SchemaError(f"{ptr or '/'}: expected an object")
    if key not in obj:
        raise SchemaError(f"{ptr}/{key}: missing")
    return obj[key]


def _as_int(x, ptr) -> int:
    if not isinstance(x, numbers.Integral) or isinstance(x, bool):
        raise SchemaError(f"{ptr}: expected an integer, got {type(x).__name__}")
    return int(x)


def _as_complex(x, ptr) -> complex:
    if (not isinstance(x, list) or len(x) != 2
            or not all(isinstance(t, numbers.Real) for t in x)):
        raise SchemaError(f"{ptr}: expected [re, im]")
    return complex(x[0], x[1])


def _matrix_in(x, rows, cols, ptr) -> np.ndarray:
    if not isinstance(x, list) or len(x) != rows:
        raise SchemaError(f"{ptr}: expected {rows} rows")
    out = np.empty((rows, cols), dtype=complex)
    for i, row in enumerate(x):
        if not isinstance(row, list) or len(row) != cols:
            raise SchemaError(f"{ptr}/{i}: expected {cols} entries")
        for j, z in enumerate(row):
            out[i, j] = _as_complex(z, f"{ptr}/{i}/{j}")
    return out


# ---------------------------------------------------------------------------
# tuples
# ---------------------------------------------------------------------------

def tuple_to_obj(v: MpsTuple) -> dict:
    return {"n": v.n, "D": v.D,
            "matrices": [_matrix_out(m) for m in v.matrices]}


def tuple_from_obj(obj, ptr: str = "") -> MpsTuple:
    n = _as_int(_expect(obj, "n", ptr), f"{ptr}/n")
    D = _as_int(_expect(obj, "D", ptr), f"{ptr}/D")
    mats = _expect(obj, "matrices", ptr)
    if not isinstance(mats, list) or len(mats) != n:
        raise SchemaError(f"{ptr}/matrices: expected {n} matrices")
    out = np.stack([_matrix_in(m, D, D, f"{ptr}/matrices/{mu}")
                    for mu, m in enumerate(mats)])
    return MpsTuple(out)


def load_tuple(path) -> MpsTuple:
    return tuple_from_obj(_read_json(path))


def save_tuple(v: MpsTuple, path) -> None:
    _write_json(path, tuple_to_obj(v))


# ---------------------------------------------------------------------------
# structured tensor data
# ---------------------------------------------------------------------------

def classa_to_obj(data: ClassAData) -> dict:
    return {
        "n": data.n, "n0": data.n0, "kR": data.kR, "kL": data.kL,
        "lambda": [_pair(z) for z in data.lam],
        "D": [_matrix_out(M) for M in data.D],
        "G": [_matrix_out(M) for M in data.G],
        "Y": _matrix_out(data.Y),
        "omega": [_matrix_out(m) for m in data.omega.matrices],
        "xR": [[_matrix_out(data.xR[mu, a]) for a in range(data.kR)]
               for mu in range(data.n)],
        "xL": [[_matrix_out(data.xL[mu, b]) for b in range(data.kL)]
               for mu in range(data.n)],
    }


def classa_from_obj(obj, ptr: str = "", validate: bool = True) -> ClassAData:
    n = _as_int(_expect(obj, "n", ptr), f"{ptr}/n")
    n0 = _as_int(_expect(obj, "n0", ptr), f"{ptr}/n0")
    kR = _as_int(_expect(obj, "kR", ptr), f"{ptr}/kR")
    kL = _as_int(_expect(obj, "kL", ptr), f"{ptr}/kL")
    K = kR + kL + 1
    lam_raw = _expect(obj, "lambda", ptr)
    if not isinstance(lam_raw, list) or len(lam_raw) != K:
        raise SchemaError(f"{ptr}/lambda: expected {K} entries")
    lam = np.array([_as_complex(z, f"{ptr}/lambda/{q}")
                    for q, z in enumerate(lam_raw)])

    def matrix_list(key, count, rows, cols):
        raw = _expect(obj, key, ptr)
        if not isinstance(raw, list) or len(raw) != count:
            raise SchemaError(f"{ptr}/{key}: expected {count} matrices")
        return [_matrix_in(m, rows, cols, f"{ptr}/{key}/{i}")
                for i, m in enumerate(raw)]

    D = matrix_list("D", kR, K, K)
    G = matrix_list("G", kL, K, K)
    Y = _matrix_in(_expect(obj, "Y", ptr), K, K, f"{ptr}/Y")
    omega = MpsTuple(np.stack(matrix_list("omega", n, n0, n0)))

    def coef_array(key, count):
        raw = _expect(obj, key, ptr)
        if not isinstance(raw, list) or len(raw) != n:
            raise SchemaError(f"{ptr}/{key}: expected {n} rows")
        out = np.zeros((n, count, n0, n0), dtype=complex)
        for mu, row in enumerate(raw):
            if not isinstance(row, list) or len(row) != count:
                raise SchemaError(f"{ptr}/{key}/{mu}: expected {count} matrices")
            for a, m in enumerate(row):
                out[mu, a] = _matrix_in(m, n0, n0, f"{ptr}/{key}/{mu}/{a}")
        return out

    xR = coef_array("xR", kR)
    xL = coef_array("xL", kL)
    data = ClassAData(n=n, n0=n0, kR=kR, kL=kL, lam=lam, D=D, G=G, Y=Y,
                      omega=omega, xR=xR, xL=xL)
    data = replace(data, B=assemble_tensor(data))
    if validate:
        check_structure(data)
    return data


def load_classa(path, validate: bool = True) -> ClassAData:
    return classa_from_obj(_read_json(path), validate=validate)


def save_classa(data: ClassAData, path) -> None:
    _write_json(path, classa_to_obj(data))


# ---------------------------------------------------------------------------
# files
# ---------------------------------------------------------------------------

def _read_json(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise IoError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: invalid JSON ({exc})") from exc


def _json_default(x):
    if isinstance(x, complex):
        return _pair(x)
    if isinstance(x, np.generic):
        return x.item()
    if isinstance(x, np.ndarray):
        return x.tolist()
    raise TypeError(f"not JSON-serializable: {type(x).__name__}")


def _write_json(path, obj) -> None:
    try:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(obj, fh, indent=1, default=_json_default)
            fh.write("\n")
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc


def format_number(x) -> str:
    """17-significant-digit text form (complex -> re+imj when imag nonzero)."""
    if isinstance(x, (bool, np.bool_)):
        return str(bool(x))
    if isinstance(x, numbers.Integral):
        return str(int(x))
    z = complex(x)
    if z.imag == 0.0:
        return format(z.real, ".17g")
    return f"{format(z.real, '.17g')}{z.imag:+.17g}j"


def write_csv(path, columns, rows) -> None:
    """Rows are dicts keyed by the declared columns; numbers use 17 digits."""
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(columns)
            for row in rows:
                w.writerow([format_number(row[c]) if isinstance(
                    row[c], (numbers.Number, np.generic)) else str(row[c])
                    for c in columns])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from exc
