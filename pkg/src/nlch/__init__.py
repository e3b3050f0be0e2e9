"""Finite-volume and spectral solvers for a nonlocal Cahn-Hilliard tumour-growth model."""

from .grid import Grid, build_grid
from .kernel import build_kernel
from .model import ModelParams, State

__all__ = ["Grid", "build_grid", "build_kernel", "ModelParams", "State"]
