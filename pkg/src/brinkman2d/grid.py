"""Staggered (MAC) grid geometry and global indexing of the unknowns.

Pressures live at cell centers, x-velocities (u) on vertical faces and
y-velocities (v) on horizontal faces.  Boundary faces are kept as
unknowns; they receive identity rows when the monolithic system is
assembled.  The global vector is ordered in contiguous blocks
``[u, v, p]``, each block row-major with j outer and i fastest.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import NamedTuple

import numpy as np


class DofKind(Enum):
    U_FACE = "u"
    V_FACE = "v"
    PRESSURE = "p"


class DofIndex(NamedTuple):
    kind: DofKind
    i: int
    j: int
    global_index: int


@dataclass(frozen=True)
class StaggeredGrid:
    """Uniform MAC grid covering the rectangle (0, lx) x (0, ly).

    Attributes
    ----------
    nx, ny : number of cells per direction (>= 1).
    lx, ly : domain extents (dimensionless; the unit square uses 1, 1).
    """

    nx: int
    ny: int
    lx: float = 1.0
    ly: float = 1.0

    def __post_init__(self):
        if self.nx < 1 or self.ny < 1:
            raise ValueError(f"cell counts must be >= 1, got nx={self.nx}, ny={self.ny}")
        if not (self.lx > 0.0 and self.ly > 0.0):
            raise ValueError(f"domain extents must be positive, got lx={self.lx}, ly={self.ly}")

    @property
    def dx(self) -> float:
        return self.lx / self.nx

    @property
    def dy(self) -> float:
        return self.ly / self.ny

    @property
    def n_u(self) -> int:
        """u-velocity unknowns on vertical faces, boundary faces included."""
        return (self.nx + 1) * self.ny

    @property
    def n_v(self) -> int:
        """v-velocity unknowns on horizontal faces, boundary faces included."""
        return self.nx * (self.ny + 1)

    @property
    def n_p(self) -> int:
        return self.nx * self.ny

    @property
    def n_velocity(self) -> int:
        return self.n_u + self.n_v

    @property
    def n_total(self) -> int:
        return self.n_u + self.n_v + self.n_p

    # Unchecked index maps; dof_index() is the validating entry point.
    def u_index(self, i, j):
        return j * (self.nx + 1) + i

    def v_index(self, i, j):
        return self.n_u + j * self.nx + i

    def p_index(self, i, j):
        return self.n_u + self.n_v + j * self.nx + i

    def u_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """(x, y) of every u-face in global u-block order."""
        i = np.arange(self.nx + 1)
        j = np.arange(self.ny)
        jj, ii = np.meshgrid(j, i, indexing="ij")
        return ii.ravel() * self.dx, (jj.ravel() + 0.5) * self.dy

    def v_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """(x, y) of every v-face in global v-block order."""
        i = np.arange(self.nx)
        j = np.arange(self.ny + 1)
        jj, ii = np.meshgrid(j, i, indexing="ij")
        return (ii.ravel() + 0.5) * self.dx, jj.ravel() * self.dy

    def p_coords(self) -> tuple[np.ndarray, np.ndarray]:
        """(x, y) of every cell center in global p-block order."""
        i = np.arange(self.nx)
        j = np.arange(self.ny)
        jj, ii = np.meshgrid(j, i, indexing="ij")
        return (ii.ravel() + 0.5) * self.dx, (jj.ravel() + 0.5) * self.dy


def build_grid(nx: int, ny: int, lx: float = 1.0, ly: float = 1.0) -> StaggeredGrid:
    """Build a uniform staggered grid with nx-by-ny cells."""
    return StaggeredGrid(int(nx), int(ny), float(lx), float(ly))


def _check_bounds(grid: StaggeredGrid, kind: DofKind, i: int, j: int) -> None:
    if kind is DofKind.U_FACE:
        ok = 0 <= i <= grid.nx and 0 <= j < grid.ny
    elif kind is DofKind.V_FACE:
        ok = 0 <= i < grid.nx and 0 <= j <= grid.ny
    else:
        ok = 0 <= i < grid.nx and 0 <= j < grid.ny
    if not ok:
        raise IndexError(f"{kind.name} index (i={i}, j={j}) out of bounds for {grid.nx}x{grid.ny} grid")


def dof_index(grid: StaggeredGrid, kind: DofKind, i: int, j: int) -> int:
    """Map (kind, i, j) to its global index in the monolithic vector."""
    _check_bounds(grid, kind, i, j)
    if kind is DofKind.U_FACE:
        return grid.u_index(i, j)
    if kind is DofKind.V_FACE:
        return grid.v_index(i, j)
    return grid.p_index(i, j)


def dof_of(grid: StaggeredGrid, global_index: int) -> DofIndex:
    """Inverse of :func:`dof_index`."""
    g = int(global_index)
    if not 0 <= g < grid.n_total:
        raise IndexError(f"global index {g} out of range [0, {grid.n_total})")
    if g < grid.n_u:
        j, i = divmod(g, grid.nx + 1)
        return DofIndex(DofKind.U_FACE, i, j, g)
    if g < grid.n_u + grid.n_v:
        j, i = divmod(g - grid.n_u, grid.nx)
        return DofIndex(DofKind.V_FACE, i, j, g)
    j, i = divmod(g - grid.n_u - grid.n_v, grid.nx)
    return DofIndex(DofKind.PRESSURE, i, j, g)


def is_boundary_velocity(grid: StaggeredGrid, kind: DofKind, i: int, j: int) -> bool:
    """True for velocity faces lying on the domain boundary (normal direction)."""
    _check_bounds(grid, kind, i, j)
    if kind is DofKind.U_FACE:
        return i == 0 or i == grid.nx
    if kind is DofKind.V_FACE:
        return j == 0 or j == grid.ny
    return False


def boundary_velocity_mask(grid: StaggeredGrid) -> np.ndarray:
    """Boolean mask over the velocity block marking boundary-normal faces."""
    mask = np.zeros(grid.n_velocity, dtype=bool)
    j = np.arange(grid.ny)
    mask[grid.u_index(0, j)] = True
    mask[grid.u_index(grid.nx, j)] = True
    i = np.arange(grid.nx)
    mask[grid.v_index(i, 0)] = True
    mask[grid.v_index(i, grid.ny)] = True
    return mask
