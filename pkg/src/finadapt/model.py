"""Two-stage robust instances with affine uncertainty and their solutions."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np

from .config import DEFAULT_TOL
from .errors import DimensionMismatch
from .geometry import Polytope


@dataclass(frozen=True, eq=False)
class AffineMap:
    """``w -> const + sum_j w_j * coeffs[j]`` for matrix- or vector-valued terms."""

    const: np.ndarray
    coeffs: np.ndarray

    def __post_init__(self):
        const = np.array(self.const, dtype=float)
        coeffs = np.array(self.coeffs, dtype=float)
        if coeffs.size == 0 and coeffs.ndim <= 1:
            coeffs = np.zeros((0,) + const.shape)
        if coeffs.shape[1:] != const.shape:
            raise DimensionMismatch(
                f"coefficient terms have shape {coeffs.shape[1:]}, constant term {const.shape}"
            )
        const.setflags(write=False)
        coeffs.setflags(write=False)
        object.__setattr__(self, "const", const)
        object.__setattr__(self, "coeffs", coeffs)

    @classmethod
    def constant(cls, value, n_omega: int) -> "AffineMap":
        value = np.asarray(value, dtype=float)
        return cls(value, np.zeros((n_omega,) + value.shape))

    @property
    def shape(self) -> tuple:
        return self.const.shape

    @property
    def n_omega(self) -> int:
        return self.coeffs.shape[0]

    def __call__(self, omega) -> np.ndarray:
        omega = np.asarray(omega, dtype=float).reshape(-1)
        if omega.size != self.n_omega:
            raise DimensionMismatch(f"expected {self.n_omega} uncertainty coordinates, got {omega.size}")
        return self.const + np.tensordot(omega, self.coeffs, axes=1)

    def is_constant(self, tol: float = DEFAULT_TOL.zero) -> bool:
        return bool(np.all(np.abs(self.coeffs) <= tol))


def _bounds(bounds, n: int, what: str) -> np.ndarray:
    if bounds is None:
        out = np.empty((n, 2))
        out[:, 0] = -math.inf
        out[:, 1] = math.inf
        return out
    out = np.array([[(-math.inf if lo is None else lo), (math.inf if hi is None else hi)]
                    for lo, hi in bounds], dtype=float).reshape(-1, 2)
    if out.shape[0] != n:
        raise DimensionMismatch(f"{what} has {out.shape[0]} entries, expected {n}")
    return out


@dataclass(frozen=True, eq=False)
class Instance:
    """``min c.x + max_w d.y(w)  s.t.  A(w) x + B(w) y(w) <= b(w)  for w in omega``."""

    c: np.ndarray
    d: np.ndarray
    A: AffineMap
    B: AffineMap
    b: AffineMap
    omega: Polytope
    x_bounds: np.ndarray = None
    y_bounds: np.ndarray = None
    x_integer: tuple = ()
    y_integer: tuple = ()
    name: str = "instance"

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        d = np.asarray(self.d, dtype=float).reshape(-1)
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "d", d)
        m = self.b.shape[0] if self.b.shape else 0
        if len(self.b.shape) != 1:
            raise DimensionMismatch("b must be vector valued")
        if self.A.shape != (m, c.size):
            raise DimensionMismatch(f"A has shape {self.A.shape}, expected {(m, c.size)}")
        if self.B.shape != (m, d.size):
            raise DimensionMismatch(f"B has shape {self.B.shape}, expected {(m, d.size)}")
        n = self.omega.ambient_dimension
        for name, amap in (("A", self.A), ("B", self.B), ("b", self.b)):
            if amap.n_omega != n:
                raise DimensionMismatch(
                    f"{name} has {amap.n_omega} coefficient terms but omega lives in R^{n}"
                )
        object.__setattr__(self, "x_bounds", _bounds(self.x_bounds, c.size, "x_bounds"))
        object.__setattr__(self, "y_bounds", _bounds(self.y_bounds, d.size, "y_bounds"))
        for name, idx, size in (("x_integer", self.x_integer, c.size),
                                ("y_integer", self.y_integer, d.size)):
            idx = tuple(sorted(int(i) for i in idx))
            if any(not 0 <= i < size for i in idx):
                raise DimensionMismatch(f"{name} index out of range")
            object.__setattr__(self, name, idx)

    @property
    def num_rows(self) -> int:
        return self.b.shape[0]

    @property
    def dim_x(self) -> int:
        return self.c.size

    @property
    def dim_y(self) -> int:
        return self.d.size

    @property
    def dim_omega(self) -> int:
        return self.omega.ambient_dimension

    def is_deterministic_AB(self, tol: float = DEFAULT_TOL.zero) -> bool:
        return self.A.is_constant(tol) and self.B.is_constant(tol)

    def b_at_vertices(self) -> np.ndarray:
        return np.array([self.b(v) for v in self.omega.vertices]).reshape(
            self.omega.num_vertices, self.num_rows)


def is_deterministic_AB(inst: Instance) -> bool:
    return inst.is_deterministic_AB()


class Method(str, Enum):
    ADAPT1 = "adapt1"
    COMP = "comp"
    ONE_D = "1d"
    ENUM2 = "enum2"
    ENUM3 = "enum3"
    MILP2 = "milp2"
    SCENARIO = "scenario"
    REFERENCE = "reference"


@dataclass
class Solution:
    x: np.ndarray
    ys: list
    objective: float
    method: Method = Method.REFERENCE
    pieces: list | None = None
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float).reshape(-1)
        self.ys = [np.asarray(y, dtype=float).reshape(-1) for y in self.ys]
        if not self.ys:
            raise ValueError("a solution needs at least one second-stage vector")

    @property
    def k(self) -> int:
        return len(self.ys)


def _check_dims(inst: Instance, x: np.ndarray, ys: Sequence[np.ndarray]) -> None:
    if x.size != inst.dim_x:
        raise DimensionMismatch(f"x has {x.size} entries, instance expects {inst.dim_x}")
    for y in ys:
        if y.size != inst.dim_y:
            raise DimensionMismatch(f"y has {y.size} entries, instance expects {inst.dim_y}")


def evaluate_constraints(inst: Instance, x, y, omega_point) -> np.ndarray:
    """Residuals ``A(w) x + B(w) y - b(w)``; nonpositive entries are satisfied."""
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    _check_dims(inst, x, [y])
    w = np.asarray(omega_point, dtype=float).reshape(-1)
    if w.size != inst.dim_omega:
        raise DimensionMismatch(f"uncertainty point has {w.size} coordinates, expected {inst.dim_omega}")
    return inst.A(w) @ x + inst.B(w) @ y - inst.b(w)


def residual_map(inst: Instance, x, y) -> tuple[np.ndarray, np.ndarray]:
    """Residuals as an affine function of w for fixed ``(x, y)``.

    Returns ``(r0, G)`` with ``residual(w) = r0 + G @ w``.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    _check_dims(inst, x, [y])
    r0 = inst.A.const @ x + inst.B.const @ y - inst.b.const
    G = (np.einsum("jrc,c->rj", inst.A.coeffs, x) + np.einsum("jrc,c->rj", inst.B.coeffs, y)
         - inst.b.coeffs.T)
    return r0, G.reshape(inst.num_rows, inst.dim_omega)


def objective_value(inst: Instance, sol: Solution) -> float:
    _check_dims(inst, sol.x, sol.ys)
    return float(inst.c @ sol.x) + max(float(inst.d @ y) for y in sol.ys)
