"""Uniform cell-centred grids, midpoint quadrature and no-flux difference operators.

Fields are plain numpy arrays with ``shape == grid.cells``.  Face arrays along
axis ``d`` have one entry less than the cell count along that axis: only
interior faces carry flux, boundary faces are zero-flux by construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Sequence

import numpy as np
import scipy.fft


class GridMismatchError(ValueError):
    """Raised when a field does not live on the expected grid."""


@dataclass(frozen=True)
class Grid:
    lengths: tuple[float, ...]
    cells: tuple[int, ...]

    @property
    def dims(self) -> int:
        return len(self.cells)

    @property
    def shape(self) -> tuple[int, ...]:
        return self.cells

    @property
    def spacing(self) -> tuple[float, ...]:
        return tuple(L / n for L, n in zip(self.lengths, self.cells))

    @property
    def cell_volume(self) -> float:
        return float(np.prod(self.spacing))

    @property
    def volume(self) -> float:
        return float(np.prod(self.lengths))

    @property
    def size(self) -> int:
        return int(np.prod(self.cells))

    @property
    def h_min(self) -> float:
        return min(self.spacing)

    def centers(self, axis: int) -> np.ndarray:
        h = self.spacing[axis]
        return (np.arange(self.cells[axis]) + 0.5) * h

    def mesh(self) -> tuple[np.ndarray, ...]:
        """Cell-centre coordinates broadcast to the full grid shape."""
        return tuple(np.meshgrid(*(self.centers(d) for d in range(self.dims)), indexing="ij"))

    def ones(self) -> np.ndarray:
        return np.ones(self.cells)

    def zeros(self) -> np.ndarray:
        return np.zeros(self.cells)

    def check(self, *fields: np.ndarray) -> None:
        for f in fields:
            if np.shape(f) != self.cells:
                raise GridMismatchError(f"field of shape {np.shape(f)} on grid {self.cells}")

    @cached_property
    def neumann_eigenvalues(self) -> np.ndarray:
        """Eigenvalues of the discrete ``-Laplacian`` with zero-flux faces, DCT-II ordering."""
        lam = np.zeros(self.cells)
        for d, (n, h) in enumerate(zip(self.cells, self.spacing)):
            k = np.arange(n)
            lam_d = (2.0 / h**2) * (1.0 - np.cos(np.pi * k / n))
            shape = [1] * self.dims
            shape[d] = n
            lam = lam + lam_d.reshape(shape)
        return lam


def build_grid(lengths: Sequence[float], cells: Sequence[int]) -> Grid:
    lengths = tuple(float(L) for L in np.atleast_1d(lengths))
    cells = tuple(int(n) for n in np.atleast_1d(cells))
    if len(lengths) != len(cells):
        raise ValueError("lengths and cells must have the same number of axes")
    if len(cells) not in (1, 2):
        raise ValueError(f"only 1D and 2D grids are supported, got dims={len(cells)}")
    if any(not np.isfinite(L) or L <= 0 for L in lengths):
        raise ValueError(f"lengths must be positive, got {lengths}")
    if any(n < 2 for n in cells):
        raise ValueError(f"need at least 2 cells per axis, got {cells}")
    return Grid(lengths, cells)


def integrate(grid: Grid, f: np.ndarray) -> float:
    """Midpoint rule for the integral of ``f`` over the domain."""
    grid.check(f)
    return float(np.sum(f) * grid.cell_volume)


def inner_product(grid: Grid, f: np.ndarray, g: np.ndarray) -> float:
    grid.check(f, g)
    return float(np.sum(f * g) * grid.cell_volume)


def l2_norm(grid: Grid, f: np.ndarray) -> float:
    return float(np.sqrt(inner_product(grid, f, f)))


def face_average(grid: Grid, c: np.ndarray) -> tuple[np.ndarray, ...]:
    """Arithmetic mean of a cell field onto the interior faces of every axis."""
    grid.check(c)
    faces = []
    for d in range(grid.dims):
        lo = np.take(c, np.arange(grid.cells[d] - 1), axis=d)
        hi = np.take(c, np.arange(1, grid.cells[d]), axis=d)
        faces.append(0.5 * (lo + hi))
    return tuple(faces)


def face_difference(grid: Grid, u: np.ndarray, axis: int) -> np.ndarray:
    """``u[i+1] - u[i]`` along ``axis`` (one value per interior face)."""
    return np.diff(u, axis=axis)


def face_gradient(grid: Grid, u: np.ndarray) -> tuple[np.ndarray, ...]:
    grid.check(u)
    return tuple(np.diff(u, axis=d) / grid.spacing[d] for d in range(grid.dims))


def divergence(grid: Grid, flux: Sequence[np.ndarray]) -> np.ndarray:
    """Finite-volume divergence of interior-face fluxes; boundary flux is zero."""
    out = np.zeros(grid.cells)
    for d in range(grid.dims):
        F = flux[d]
        expected = list(grid.cells)
        expected[d] -= 1
        if F.shape != tuple(expected):
            raise GridMismatchError(f"face array of shape {F.shape} on axis {d}, expected {tuple(expected)}")
        pad = [(0, 0)] * grid.dims
        pad[d] = (1, 1)
        Fp = np.pad(F, pad)
        out += np.diff(Fp, axis=d) / grid.spacing[d]
    return out


def apply_divgrad(grid: Grid, coef: Sequence[np.ndarray], u: np.ndarray) -> np.ndarray:
    """Conservative ``div(coef grad u)`` with zero flux through the boundary."""
    for c in coef:
        if not np.all(np.isfinite(c)):
            raise ValueError("non-finite face coefficient")
    grad = face_gradient(grid, u)
    return divergence(grid, [c * g for c, g in zip(coef, grad)])


def laplacian(grid: Grid, u: np.ndarray) -> np.ndarray:
    ones = tuple(np.ones(f.shape) for f in face_average(grid, grid.ones()))
    return apply_divgrad(grid, ones, u)


def neumann_inverse(grid: Grid, f: np.ndarray) -> np.ndarray:
    """Solve ``(-Lap_h + I) u = f`` exactly by diagonalising in the DCT-II basis."""
    grid.check(f)
    fh = scipy.fft.dctn(f, type=2, norm="ortho")
    return scipy.fft.idctn(fh / (1.0 + grid.neumann_eigenvalues), type=2, norm="ortho")


def neumann_forward(grid: Grid, u: np.ndarray) -> np.ndarray:
    return u - laplacian(grid, u)


def dual_norm(grid: Grid, f: np.ndarray) -> float:
    """Discrete V' norm ``sqrt((f, N^{-1} f))``."""
    val = inner_product(grid, f, neumann_inverse(grid, f))
    return float(np.sqrt(max(val, 0.0)))


def h1_norm_sq(grid: Grid, f: np.ndarray) -> float:
    """Squared discrete V norm: L2 part plus face-gradient part."""
    grad = face_gradient(grid, f)
    return inner_product(grid, f, f) + sum(float(np.sum(g * g)) * grid.cell_volume for g in grad)
