"""Faedo-Galerkin backend in the Neumann eigenbasis of ``-Lap + I``.

Eigenfunctions are tensor cosines sampled at the cell centres.  Cosines with
wavenumber below the cell count are exactly orthonormal under the midpoint
rule, so projection is a weighted matrix product and the semi-discrete energy
identity holds exactly in quadrature.  Nonlinear terms are evaluated
pseudo-spectrally: reconstruct, evaluate pointwise, project.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import product

import numpy as np

from .grid import Grid, integrate as integral
from .kernel import convolve, kernel_mass
from .model import ModelParams
from .timestepper import StepLimitError, StepperConfig


class SpectralBasis:
    def __init__(self, grid: Grid, modes, dealias: bool = False):
        modes = tuple(int(n) for n in np.atleast_1d(modes))
        if len(modes) == 1 and grid.dims == 2:
            modes = modes * 2
        if len(modes) != grid.dims:
            raise ValueError("one mode count per axis expected")
        for n, c in zip(modes, grid.cells):
            if not 1 <= n <= c:
                raise ValueError(f"mode count {n} outside [1, {c}] for this grid")
        self.grid = grid
        self.modes = modes
        self.dealias = dealias

        vals, dvals = [], []
        for d in range(grid.dims):
            L = grid.lengths[d]
            x = grid.centers(d)
            k = np.arange(modes[d])
            scale = np.where(k == 0, 1.0 / np.sqrt(L), np.sqrt(2.0 / L))
            kappa = k * np.pi / L
            vals.append(scale[:, None] * np.cos(kappa[:, None] * x[None, :]))
            dvals.append(-(scale * kappa)[:, None] * np.sin(kappa[:, None] * x[None, :]))
        self.wavenumbers = np.array(list(product(*(range(n) for n in modes))))
        self.size = len(self.wavenumbers)

        def tensor(factors):
            rows = []
            for ks in self.wavenumbers:
                f = factors[0][ks[0]]
                for d in range(1, grid.dims):
                    f = np.multiply.outer(f, factors[d][ks[d]])
                rows.append(np.ravel(f))
            return np.array(rows)

        self.W = tensor(vals)
        self.G = []
        for d in range(grid.dims):
            self.G.append(tensor([dvals[e] if e == d else vals[e] for e in range(grid.dims)]))
        kap2 = sum((self.wavenumbers[:, d] * np.pi / grid.lengths[d]) ** 2 for d in range(grid.dims))
        self.eigenvalues = 1.0 + kap2
        cut = np.all(self.wavenumbers < np.ceil(2 * np.array(modes) / 3), axis=1)
        self._keep = cut if dealias else np.ones(self.size, dtype=bool)

    def project(self, f: np.ndarray) -> np.ndarray:
        self.grid.check(f)
        return self.W @ np.ravel(f) * self.grid.cell_volume

    def reconstruct(self, coeffs: np.ndarray) -> np.ndarray:
        return (np.asarray(coeffs) @ self.W).reshape(self.grid.cells)

    def gradient(self, coeffs: np.ndarray) -> list[np.ndarray]:
        return [(np.asarray(coeffs) @ G).reshape(self.grid.cells) for G in self.G]

    def project_nonlinear(self, f: np.ndarray) -> np.ndarray:
        return np.where(self._keep, self.project(f), 0.0)

    def test_gradients(self, flux: list[np.ndarray]) -> np.ndarray:
        """``(F, grad w_k)`` for every basis function, by midpoint quadrature."""
        return sum(G @ np.ravel(F) for G, F in zip(self.G, flux)) * self.grid.cell_volume


@dataclass
class GalerkinState:
    t: float
    a: np.ndarray
    c: np.ndarray


def _fields(gs: GalerkinState, params: ModelParams, basis: SpectralBasis):
    phys, k = params.physics, params.kernel
    phi = basis.reconstruct(gs.a)
    sigma = basis.reconstruct(gs.c)
    raw = (params.A * phys.dpsi(phi) + params.B * (kernel_mass(k) * phi - convolve(k, phi))
           - params.chi * sigma)
    mu_c = basis.project_nonlinear(raw)
    mu = basis.reconstruct(mu_c)
    zeta_c = gs.c.copy()
    zeta_c[0] += params.chi * np.sqrt(params.grid.volume)  # chi * 1 lives in the constant mode
    zeta_c = zeta_c - params.chi * gs.a
    S = phys.P(phi) * (basis.reconstruct(zeta_c) - mu)
    return phi, sigma, mu_c, mu, zeta_c, S


def galerkin_rhs(gs: GalerkinState, params: ModelParams, basis: SpectralBasis) -> tuple[np.ndarray, np.ndarray]:
    if params.physics.degenerate:
        raise ValueError("the Galerkin backend needs non-degenerate (possibly regularised) physics")
    phi, sigma, mu_c, mu, zeta_c, S = _fields(gs, params, basis)
    m, n = params.physics.m(phi), params.physics.n(phi)
    grad_mu = basis.gradient(mu_c)
    grad_zeta = basis.gradient(zeta_c)
    S_c = basis.project_nonlinear(S)
    da = -basis.test_gradients([m * g for g in grad_mu]) + S_c
    dc = -basis.test_gradients([n * g for g in grad_zeta]) - S_c
    return da, dc


def galerkin_energy(gs: GalerkinState, params: ModelParams, basis: SpectralBasis) -> float:
    phi = basis.reconstruct(gs.a)
    sigma = basis.reconstruct(gs.c)
    k = params.kernel
    dens = (params.A * params.physics.psi(phi)
            + 0.5 * params.B * (kernel_mass(k) * phi**2 - phi * convolve(k, phi))
            + 0.5 * sigma**2 + params.chi * sigma * (1 - phi))
    return integral(params.grid, dens)


def galerkin_dissipation(gs: GalerkinState, params: ModelParams, basis: SpectralBasis) -> float:
    phi, sigma, mu_c, mu, zeta_c, S = _fields(gs, params, basis)
    grid, phys = params.grid, params.physics
    m, n = phys.m(phi), phys.n(phi)
    D_m = integral(grid, m * sum(g**2 for g in basis.gradient(mu_c)))
    D_n = integral(grid, n * sum(g**2 for g in basis.gradient(zeta_c)))
    D_P = integral(grid, phys.P(phi) * (basis.reconstruct(zeta_c) - mu) ** 2)
    return D_m + D_n + D_P


def galerkin_stable_dt(gs: GalerkinState, params: ModelParams, basis: SpectralBasis, safety: float) -> float:
    phys = params.physics
    phi = basis.reconstruct(gs.a)
    kap2 = float(np.max(basis.eigenvalues) - 1.0)
    a = kernel_mass(params.kernel)
    coef = max(float(np.max(np.abs(phys.m(phi) * (params.A * phys.d2psi(phi) + params.B * a)))),
               float(np.max(phys.n(phi))))
    P = phys.P(phi)
    rate = coef * kap2 / 2 + 0.5 * float(np.max(P * (np.abs(params.A * phys.d2psi(phi) + params.B * a) + 1 + 2 * params.chi)))
    return float("inf") if rate <= 0 else safety / rate


@dataclass
class GalerkinTrajectory:
    times: list[float] = field(default_factory=list)
    states: list[GalerkinState] = field(default_factory=list)
    energies: list[float] = field(default_factory=list)
    residual: list[float] = field(default_factory=list)
    dts: list[float] = field(default_factory=list)


def integrate_galerkin(a0: np.ndarray, c0: np.ndarray, params: ModelParams, basis: SpectralBasis,
                       cfg: StepperConfig, t0: float = 0.0) -> GalerkinTrajectory:
    """Explicit Euler on the coefficient ODEs, recording the energy-identity residual every step."""
    gs = GalerkinState(t0, np.array(a0, dtype=float), np.array(c0, dtype=float))
    E0 = galerkin_energy(gs, params, basis)
    traj = GalerkinTrajectory([gs.t], [gs], [E0], [0.0])
    acc = 0.0
    tol = 1e-12 * max(1.0, abs(cfg.t_end))
    k = 0
    while cfg.t_end - gs.t > tol:
        if k >= cfg.max_steps:
            raise StepLimitError(f"max_steps={cfg.max_steps} reached at t={gs.t:.6g}")
        dt = cfg.dt
        if cfg.adapt:
            dt = min(dt, galerkin_stable_dt(gs, params, basis, cfg.safety))
        dt = min(dt, cfg.t_end - gs.t)
        da, dc = galerkin_rhs(gs, params, basis)
        acc += dt * galerkin_dissipation(gs, params, basis)
        t_new = cfg.t_end if cfg.t_end - (gs.t + dt) <= tol else gs.t + dt
        gs = GalerkinState(t_new, gs.a + dt * da, gs.c + dt * dc)
        if not (np.all(np.isfinite(gs.a)) and np.all(np.isfinite(gs.c))):
            raise FloatingPointError(f"non-finite Galerkin coefficients at t={gs.t:.6g}")
        E = galerkin_energy(gs, params, basis)
        traj.times.append(gs.t)
        traj.states.append(gs)
        traj.energies.append(E)
        traj.residual.append(E + acc - E0)
        traj.dts.append(dt)
        k += 1
    return traj
