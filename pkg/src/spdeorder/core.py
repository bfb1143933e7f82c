"""Grids, discrete fields, norms and order utilities shared by all modules.

The discrete state space is the set of values on interior nodes of a
uniform 1D grid with homogeneous Dirichlet boundary values (implicit
ghost zeros), or a single scalar in ODE mode.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

PDE_1D = "pde_1d"
ODE = "ode"


class GridMismatchError(ValueError):
    """Two fields that must share a grid do not."""


@dataclass(frozen=True)
class Grid:
    """Uniform grid on (0, L) with n_interior interior nodes, or a 0D grid."""

    mode: str = PDE_1D
    n_interior: int = 64
    length: float = 1.0

    def __post_init__(self):
        if self.mode not in (PDE_1D, ODE):
            raise ValueError(f"unknown grid mode {self.mode!r}")
        if self.mode == ODE:
            if self.n_interior != 1:
                raise ValueError("ode mode requires n_interior = 1")
        else:
            if self.n_interior < 2:
                raise ValueError("pde_1d mode requires n_interior >= 2")
            if not self.length > 0:
                raise ValueError("domain length must be positive")

    @property
    def dx(self) -> float:
        # Unit weight in ODE mode so that norms reduce to absolute values.
        if self.mode == ODE:
            return 1.0
        return self.length / (self.n_interior + 1)

    @property
    def x(self) -> np.ndarray:
        """Interior node coordinates."""
        if self.mode == ODE:
            return np.zeros(1)
        return self.dx * np.arange(1, self.n_interior + 1)

    @classmethod
    def ode(cls) -> "Grid":
        return cls(mode=ODE, n_interior=1, length=1.0)


@dataclass(frozen=True)
class Field:
    """Values of the discrete state on the interior nodes of a grid."""

    values: np.ndarray
    grid: Grid

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=float)
        if vals.shape != (self.grid.n_interior,):
            raise ValueError(
                f"field has {vals.shape} values, grid has "
                f"{self.grid.n_interior} interior nodes"
            )
        if not np.all(np.isfinite(vals)):
            raise ValueError("field values must be finite")
        vals = vals.copy()
        vals.flags.writeable = False
        object.__setattr__(self, "values", vals)

    def __eq__(self, other):
        if not isinstance(other, Field):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.values, other.values)


def zeros(grid: Grid) -> Field:
    return Field(np.zeros(grid.n_interior), grid)


def constant(grid: Grid, value: float) -> Field:
    return Field(np.full(grid.n_interior, float(value)), grid)


@dataclass(frozen=True)
class TimeGrid:
    """Uniform partition of [0, T] into n_steps steps."""

    T: float
    n_steps: int

    def __post_init__(self):
        if not self.T > 0:
            raise ValueError("final time must be positive")
        if self.n_steps < 1:
            raise ValueError("need at least one time step")

    @property
    def dt(self) -> float:
        return self.T / self.n_steps

    def times(self) -> np.ndarray:
        return self.dt * np.arange(self.n_steps + 1)


def _require_same_grid(a: Field, b: Field) -> None:
    if a.grid != b.grid:
        raise GridMismatchError(f"grid mismatch: {a.grid} vs {b.grid}")


def h_norm(u: Field) -> float:
    """dx-weighted Euclidean norm, the discrete L2 norm."""
    return h_norm_values(u.values, u.grid.dx)


def h_norm_values(values: np.ndarray, dx: float) -> float:
    return float(np.sqrt(np.dot(values, values) * dx))


def order_leq(a: Field, b: Field, tol: float = 0.0) -> tuple[bool, float]:
    """Pointwise order a <= b up to tol.

    Returns (holds, max_violation) with max_violation = max_i(a_i - b_i),
    which may be negative.
    """
    _require_same_grid(a, b)
    violation = float(np.max(a.values - b.values))
    return violation <= tol, violation


def positive_part_energy(a: Field, b: Field) -> float:
    """Squared discrete L2 norm of (a - b)^+; zero iff a <= b pointwise."""
    _require_same_grid(a, b)
    return positive_part_energy_values(a.values - b.values, a.grid.dx)


def positive_part_energy_values(diff: np.ndarray, dx: float) -> float:
    pos = np.maximum(diff, 0.0)
    return float(np.dot(pos, pos) * dx)
