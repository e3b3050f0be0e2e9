"""Domain-restricted nonlocal operators: ``J * f``, ``grad J * f`` and the kernel mass ``a``.

Kernels are sampled on the lattice of cell-centre differences, which covers
``Omega - Omega`` exactly.  Convolutions integrate over the domain only, so the
fast path zero-pads (``fftconvolve`` in ``valid`` mode) instead of wrapping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.signal

from .grid import Grid

KINDS = ("gaussian", "compact", "delta", "custom")


@dataclass(frozen=True)
class KernelBounds:
    a_star: float
    a_lower: float
    b: float


@dataclass
class KernelTable:
    grid: Grid
    kind: str
    params: dict
    samples: np.ndarray
    grad_samples: tuple[np.ndarray, ...] | None
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def differentiable(self) -> bool:
        return self.grad_samples is not None


def offset_lattice(grid: Grid) -> tuple[np.ndarray, ...]:
    axes = [np.arange(-(n - 1), n) * h for n, h in zip(grid.cells, grid.spacing)]
    return tuple(np.meshgrid(*axes, indexing="ij"))


def _symmetrize(s: np.ndarray) -> np.ndarray:
    flipped = s[tuple(slice(None, None, -1) for _ in range(s.ndim))]
    return 0.5 * (s + flipped)


def _antisymmetrize(s: np.ndarray) -> np.ndarray:
    flipped = s[tuple(slice(None, None, -1) for _ in range(s.ndim))]
    return 0.5 * (s - flipped)


def build_kernel(kind: str, params: dict, grid: Grid) -> KernelTable:
    """Sample a kernel and its gradient on the offset lattice.

    ``gaussian``: ``amplitude * exp(-|z|^2 / (2 width^2))``.
    ``compact``: ``amplitude * (1 - |z|^2/width^2)_+^2`` (C1, support radius ``width``).
    ``delta``: a single sample at ``z = 0`` such that ``J * f == weight * f``.
    ``custom``: ``params["J"](*z)`` and optionally ``params["gradJ"](*z)``; samples are symmetrised.
    """
    if kind not in KINDS:
        raise ValueError(f"unknown kernel kind {kind!r}; expected one of {KINDS}")
    params = dict(params)
    z = offset_lattice(grid)
    r2 = sum(zi**2 for zi in z)

    if kind in ("gaussian", "compact"):
        width = float(params.get("width", 0.0))
        if not width > 0:
            raise ValueError(f"kernel width must be positive, got {width}")
        amp = float(params.get("amplitude", 1.0))
        if kind == "gaussian":
            J = amp * np.exp(-r2 / (2 * width**2))
            dJ_dr2_times2 = -J / width**2  # grad J = z * (-J / width^2)
        else:
            q = np.clip(1.0 - r2 / width**2, 0.0, None)
            J = amp * q**2
            dJ_dr2_times2 = -4.0 * amp * q / width**2
        grad = tuple(zi * dJ_dr2_times2 for zi in z)
        return KernelTable(grid, kind, params, J, grad)

    if kind == "delta":
        weight = float(params.get("weight", 1.0))
        J = np.zeros(r2.shape)
        J[tuple(n - 1 for n in grid.cells)] = weight / grid.cell_volume
        return KernelTable(grid, kind, params, J, None)

    func: Callable = params["J"]
    J = _symmetrize(np.asarray(func(*z), dtype=float))
    grad = None
    if params.get("gradJ") is not None:
        g = params["gradJ"](*z)
        grad = tuple(_antisymmetrize(np.asarray(gi, dtype=float)) for gi in g)
    return KernelTable(grid, kind, params, J, grad)


def _fft_convolve(grid: Grid, samples: np.ndarray, f: np.ndarray) -> np.ndarray:
    return scipy.signal.fftconvolve(samples, f, mode="valid") * grid.cell_volume


def direct_convolve(grid: Grid, samples: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Reference O(N^2) quadrature ``sum_j J(x_i - x_j) f_j v``."""
    grid.check(f)
    out = np.zeros(grid.cells)
    for idx in np.ndindex(*grid.cells):
        # offset index for x_i - x_j is (i - j) + (n - 1)
        sl = tuple(slice(i + n - 1, i - 1 if i > 0 else None, -1) for i, n in zip(idx, grid.cells))
        out[idx] = np.sum(samples[sl] * f)
    return out * grid.cell_volume


def convolve(k: KernelTable, f: np.ndarray) -> np.ndarray:
    k.grid.check(f)
    if k.kind == "delta":
        return k.params.get("weight", 1.0) * np.asarray(f, dtype=float)
    return _fft_convolve(k.grid, k.samples, f)


def kernel_mass(k: KernelTable) -> np.ndarray:
    """``a(x) = int_Omega J(x - y) dy``, cached on the table."""
    if "a" not in k._cache:
        k._cache["a"] = convolve(k, k.grid.ones())
    return k._cache["a"]


def grad_convolve(k: KernelTable, f: np.ndarray) -> tuple[np.ndarray, ...]:
    if not k.differentiable:
        raise ValueError(f"kernel kind {k.kind!r} has no sampled gradient")
    k.grid.check(f)
    return tuple(_fft_convolve(k.grid, g, f) for g in k.grad_samples)


def grad_kernel_mass(k: KernelTable) -> tuple[np.ndarray, ...]:
    if "grad_a" not in k._cache:
        k._cache["grad_a"] = grad_convolve(k, k.grid.ones())
    return k._cache["grad_a"]


def kernel_bounds(k: KernelTable) -> KernelBounds:
    if "bounds" not in k._cache:
        a = kernel_mass(k)
        if k.kind == "delta":
            b = 0.0
        elif k.differentiable:
            gnorm = np.sqrt(sum(g**2 for g in k.grad_samples))
            b = float(np.max(_fft_convolve(k.grid, gnorm, k.grid.ones())))
        else:
            b = float("nan")
        abs_mass = convolve_abs(k)
        k._cache["bounds"] = KernelBounds(float(np.max(abs_mass)), float(np.min(a)), b)
    return k._cache["bounds"]


def convolve_abs(k: KernelTable) -> np.ndarray:
    """``int_Omega |J(x - y)| dy``; equals ``a`` for nonnegative kernels."""
    if k.kind == "delta":
        return abs(k.params.get("weight", 1.0)) * k.grid.ones()
    return _fft_convolve(k.grid, np.abs(k.samples), k.grid.ones())
