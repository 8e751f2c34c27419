"""JSON instance and solution files."""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .errors import FinAdaptError, InstanceFormatError
from .geometry import build_polytope
from .model import AffineMap, Instance, Method, Solution


def _bounds_to_json(bounds: np.ndarray) -> list:
    return [[None if math.isinf(lo) else float(lo), None if math.isinf(hi) else float(hi)]
            for lo, hi in bounds]


def _map_to_json(amap: AffineMap) -> dict:
    return {"const": amap.const.tolist(), "coeffs": amap.coeffs.tolist()}


def instance_to_json(inst: Instance) -> dict:
    return {
        "name": inst.name,
        "omega_vertices": inst.omega.vertices.tolist(),
        "c": inst.c.tolist(),
        "d": inst.d.tolist(),
        "A": _map_to_json(inst.A),
        "B": _map_to_json(inst.B),
        "b": _map_to_json(inst.b),
        "x_bounds": _bounds_to_json(inst.x_bounds),
        "y_bounds": _bounds_to_json(inst.y_bounds),
        "x_integer": list(inst.x_integer),
        "y_integer": list(inst.y_integer),
    }


def _field(doc: dict, key: str, default=None, required=True):
    if key not in doc:
        if required:
            raise InstanceFormatError(f"field {key!r}: missing")
        return default
    return doc[key]


def _array(value, key: str, ndim: int) -> np.ndarray:
    try:
        arr = np.array(value, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"field {key!r}: expected numbers ({exc})") from None
    if arr.size == 0:
        arr = arr.reshape((0,) * ndim if ndim == 1 else arr.shape)
    if arr.ndim != ndim and arr.size:
        raise InstanceFormatError(f"field {key!r}: expected a {ndim}-dimensional array, got {arr.ndim}")
    return arr


def _map(doc: dict, key: str, shape: tuple | None, n_omega: int) -> AffineMap:
    """Parse ``{"const": ..., "coeffs": [...]}``; ``shape=None`` accepts any vector."""
    entry = _field(doc, key)
    if not isinstance(entry, dict):
        raise InstanceFormatError(f"field {key!r}: expected an object with 'const' and 'coeffs'")
    try:
        const = np.array(_field(entry, "const"), dtype=float)
        coeffs = np.array(entry.get("coeffs", []), dtype=float)
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"field {key!r}: expected numbers ({exc})") from None
    if shape is None:
        shape = (const.size,)
    if const.size != int(np.prod(shape)):
        raise InstanceFormatError(f"field {key}.const: expected shape {shape}, got {const.shape}")
    const = const.reshape(shape)
    if coeffs.size == 0:
        coeffs = np.zeros((n_omega,) + shape)
    if coeffs.size != n_omega * int(np.prod(shape)) or coeffs.shape[0] != n_omega:
        raise InstanceFormatError(
            f"field {key}.coeffs: expected {n_omega} terms of shape {shape}, got shape {coeffs.shape}"
        )
    return AffineMap(const, coeffs.reshape((n_omega,) + shape))


def _bounds(doc: dict, key: str, n: int):
    raw = _field(doc, key, None, required=False)
    if raw is None:
        return None
    if len(raw) != n or any(not isinstance(b, (list, tuple)) or len(b) != 2 for b in raw):
        raise InstanceFormatError(f"field {key!r}: expected {n} pairs [lo, hi]")
    return raw


def instance_from_json(doc: dict) -> Instance:
    if not isinstance(doc, dict):
        raise InstanceFormatError("instance file must hold a JSON object")
    try:
        points = _array(_field(doc, "omega_vertices"), "omega_vertices", 2)
        omega = build_polytope(points)
        c = _array(_field(doc, "c"), "c", 1).reshape(-1)
        d = _array(_field(doc, "d"), "d", 1).reshape(-1)
        b = _map(doc, "b", None, omega.ambient_dimension)
        m = b.shape[0]
        A = _map(doc, "A", (m, c.size), omega.ambient_dimension)
        B = _map(doc, "B", (m, d.size), omega.ambient_dimension)
        return Instance(
            c=c, d=d, A=A, B=B, b=b, omega=omega,
            x_bounds=_bounds(doc, "x_bounds", c.size),
            y_bounds=_bounds(doc, "y_bounds", d.size),
            x_integer=tuple(_field(doc, "x_integer", (), required=False)),
            y_integer=tuple(_field(doc, "y_integer", (), required=False)),
            name=str(_field(doc, "name", "instance", required=False)),
        )
    except InstanceFormatError:
        raise
    except (FinAdaptError, TypeError, ValueError) as exc:
        raise InstanceFormatError(str(exc)) from None


def _load(path) -> dict:
    text = Path(path).read_text(encoding="utf-8")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InstanceFormatError(f"{path}: line {exc.lineno} column {exc.colno}: {exc.msg}") from None


def load_instance(path) -> Instance:
    return instance_from_json(_load(path))


def save_instance(inst: Instance, path) -> None:
    Path(path).write_text(json.dumps(instance_to_json(inst), indent=2) + "\n", encoding="utf-8")


def solution_to_json(sol: Solution, certificate=None) -> dict:
    out = {
        "x": sol.x.tolist(),
        "ys": [y.tolist() for y in sol.ys],
        "objective": sol.objective,
        "method": Method(sol.method).value,
        "k": sol.k,
    }
    if certificate is not None:
        out["certificate"] = certificate.to_json()
    if sol.pieces is not None:
        out["pieces"] = [p.to_json() for p in sol.pieces]
    return out


def solution_from_json(doc: dict) -> Solution:
    if not isinstance(doc, dict):
        raise InstanceFormatError("solution file must hold a JSON object")
    try:
        ys = _field(doc, "ys")
        sol = Solution(
            np.array(_field(doc, "x", []), dtype=float),
            [np.array(y, dtype=float) for y in ys],
            float(_field(doc, "objective")),
            Method(_field(doc, "method", Method.REFERENCE.value, required=False)),
        )
    except InstanceFormatError:
        raise
    except (TypeError, ValueError) as exc:
        raise InstanceFormatError(f"solution: {exc}") from None
    if "k" in doc and doc["k"] != sol.k:
        raise InstanceFormatError(f"field 'k': says {doc['k']} but {sol.k} vectors are listed")
    return sol


def load_solution(path) -> Solution:
    return solution_from_json(_load(path))


def save_json(doc: dict, path) -> None:
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
