"""Semi-discrete right-hand sides of the nonlocal tumour-growth system.

Two assemblies are provided:

* ``nondegenerate``: the chemical potential is formed explicitly and the
  phi-flux is ``m(phi) grad mu``.
* ``degenerate``: the chemical potential is eliminated and the phi-flux is
  written as ``m (A Psi'' + B a) grad phi + m (B phi grad a - B grad(J*phi) - chi grad sigma)``.

On a face the degenerate diffusion coefficient uses the secant of ``Psi'``
and the remainder uses the exact discrete product rule
``d(a phi) = mean(a) d(phi) + mean(phi) d(a)``, so away from ``|phi| = 1`` the
two assemblies coincide up to roundoff.  Faces touching the guard strip
``|phi| > 1 - GUARD`` of a singular potential fall back to the face mean of
the continuous product ``A m Psi'' + B m a``, which stays finite at ``+-1``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from .grid import Grid, divergence, face_average
from .kernel import KernelTable, convolve, kernel_mass
from .physics import GUARD, Physics, RegularizedPhysics

FORMULATIONS = ("nondegenerate", "degenerate")
SECANT_MIN = 1e-7


class ConfinementError(RuntimeError):
    """The order parameter left [-1, 1] by more than the tolerance."""


@dataclass
class State:
    t: float
    phi: np.ndarray
    sigma: np.ndarray

    def copy(self) -> "State":
        return State(self.t, self.phi.copy(), self.sigma.copy())


@dataclass
class ModelParams:
    grid: Grid
    kernel: KernelTable
    physics: Physics | RegularizedPhysics
    A: float = 1.0
    B: float = 1.0
    chi: float = 0.0
    formulation: str = "nondegenerate"
    upwind: bool = False
    confinement_tol: float = 1e-6

    def __post_init__(self):
        if not (self.A > 0 and self.B > 0):
            raise ValueError("A and B must be positive")
        if self.chi < 0:
            raise ValueError("chi must be nonnegative")
        if self.formulation not in FORMULATIONS:
            raise ValueError(f"formulation must be one of {FORMULATIONS}")
        if self.formulation == "degenerate" and isinstance(self.physics, Physics):
            if not (self.physics.degenerate and self.physics.singular):
                raise ValueError("degenerate formulation needs a degenerate mobility and a singular potential")

    def with_physics(self, physics, formulation=None) -> "ModelParams":
        return replace(self, physics=physics, formulation=formulation or self.formulation)


@dataclass
class Assembly:
    """Everything computed while forming the right-hand side of one state."""

    dphi: np.ndarray
    dsigma: np.ndarray
    source: np.ndarray
    mu: np.ndarray | None
    m_face: tuple[np.ndarray, ...]
    n_face: tuple[np.ndarray, ...]
    diff_face: tuple[np.ndarray, ...]
    adv_face: tuple[np.ndarray, ...] = field(default_factory=tuple)
    reaction_rate: float = 0.0


def _pointwise_phi(phi: np.ndarray, params: ModelParams) -> np.ndarray:
    """Argument for pointwise constitutive functions (clipped in the degenerate form)."""
    if params.formulation != "degenerate":
        return phi
    excess = float(np.max(np.abs(phi))) - 1.0
    if excess > params.confinement_tol:
        raise ConfinementError(f"max |phi| = {1 + excess:.12g} exceeds 1 + {params.confinement_tol:g}")
    return np.clip(phi, -1.0, 1.0)


def chemical_potential(state: State, params: ModelParams, dpsi: np.ndarray | None = None) -> np.ndarray:
    """``mu = A Psi'(phi) + B a phi - B J*phi - chi sigma``."""
    phys, k = params.physics, params.kernel
    a = kernel_mass(k)
    if dpsi is None:
        dpsi = phys.dpsi(state.phi)
    return (
        params.A * dpsi
        + params.B * (a * state.phi - convolve(k, state.phi))
        - params.chi * state.sigma
    )


def source(state: State, params: ModelParams, mu: np.ndarray) -> np.ndarray:
    """``P(phi) (sigma + chi (1 - phi) - mu)``."""
    phi = _pointwise_phi(state.phi, params)
    return params.physics.P(phi) * (state.sigma + params.chi * (1 - state.phi) - mu)


def _faces(arr: np.ndarray, axis: int) -> tuple[np.ndarray, np.ndarray]:
    n = arr.shape[axis]
    return np.take(arr, np.arange(n - 1), axis=axis), np.take(arr, np.arange(1, n), axis=axis)


def _diffusion_faces(phi: np.ndarray, params: ModelParams, m_cell: np.ndarray, a: np.ndarray, triple=None):
    """Face coefficient of ``m (A Psi'' + B a)`` on ``grad phi`` (secant form)."""
    phys, A, B = params.physics, params.A, params.B
    singular = getattr(phys, "singular", False)
    phic = np.clip(phi, -1.0, 1.0) if singular else phi
    if singular:
        guarded = np.abs(phic) > 1 - GUARD
        safe = np.where(guarded, 0.0, phic)
        _, dpsi, d2psi = phys.triple(safe)
        fallback = A * phys.m_psi2(phic) + B * m_cell * a
    else:
        guarded = np.zeros(phi.shape, dtype=bool)
        _, dpsi, d2psi = triple if triple is not None else phys.triple(phi)
        fallback = None

    out = []
    for d in range(params.grid.dims):
        p_lo, p_hi = _faces(phi, d)
        g_lo, g_hi = _faces(dpsi, d)
        h_lo, h_hi = _faces(d2psi, d)
        m_lo, m_hi = _faces(m_cell, d)
        a_lo, a_hi = _faces(a, d)
        dp = p_hi - p_lo
        small = np.abs(dp) < SECANT_MIN
        secant = np.where(small, 0.5 * (h_lo + h_hi), (g_hi - g_lo) / np.where(small, 1.0, dp))
        D = 0.5 * (m_lo + m_hi) * (A * secant + B * 0.5 * (a_lo + a_hi))
        if singular:
            q_lo, q_hi = _faces(guarded, d)
            f_lo, f_hi = _faces(fallback, d)
            D = np.where(q_lo | q_hi, 0.5 * (f_lo + f_hi), D)
        out.append(D)
    return tuple(out)


def _reaction_rate(P: np.ndarray, params: ModelParams, d2_eff: np.ndarray) -> float:
    if not np.any(P):
        return 0.0
    return float(np.max(P * (np.abs(d2_eff) + 1.0 + 2.0 * params.chi)))


def rhs_nondegenerate(state: State, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    asm = assemble_nondegenerate(state, params)
    return asm.dphi, asm.dsigma


def rhs_degenerate(state: State, params: ModelParams) -> tuple[np.ndarray, np.ndarray]:
    asm = assemble_degenerate(state, params)
    return asm.dphi, asm.dsigma


def assemble(state: State, params: ModelParams) -> Assembly:
    if params.formulation == "degenerate":
        return assemble_degenerate(state, params)
    return assemble_nondegenerate(state, params)


def _nutrient_part(state, params, phi_pt, S):
    grid = params.grid
    n_face = face_average(grid, params.physics.n(phi_pt))
    zeta = state.sigma + params.chi * (1 - state.phi)
    grad = [np.diff(zeta, axis=d) / grid.spacing[d] for d in range(grid.dims)]
    dsigma = divergence(grid, [c * g for c, g in zip(n_face, grad)]) - S
    return n_face, dsigma


def assemble_nondegenerate(state: State, params: ModelParams) -> Assembly:
    grid, phys = params.grid, params.physics
    grid.check(state.phi, state.sigma)
    a = kernel_mass(params.kernel)
    triple = phys.triple(state.phi)
    mu = chemical_potential(state, params, triple[1])
    S = source(state, params, mu)
    m_cell = phys.m(state.phi)
    m_face = face_average(grid, m_cell)
    grad_mu = [np.diff(mu, axis=d) / grid.spacing[d] for d in range(grid.dims)]
    dphi = divergence(grid, [c * g for c, g in zip(m_face, grad_mu)]) + S
    n_face, dsigma = _nutrient_part(state, params, state.phi, S)

    diff_face = _diffusion_faces(state.phi, params, m_cell, a, triple)
    # remaining part of m grad mu that is not m (A Psi'' + B a) grad phi
    adv = tuple(mf * g for mf, g in zip(m_face, grad_mu))
    adv = tuple(f - D * np.diff(state.phi, axis=d) / grid.spacing[d]
                for d, (f, D) in enumerate(zip(adv, diff_face)))
    P = phys.P(state.phi)
    rate = _reaction_rate(P, params, params.A * triple[2] + params.B * a)
    return Assembly(dphi, dsigma, S, mu, m_face, n_face, diff_face, adv, rate)


def assemble_degenerate(state: State, params: ModelParams) -> Assembly:
    grid, phys, k = params.grid, params.physics, params.kernel
    grid.check(state.phi, state.sigma)
    A, B, chi = params.A, params.B, params.chi
    phi = state.phi
    phic = _pointwise_phi(phi, params)
    a = kernel_mass(k)
    Jphi = convolve(k, phi)

    m_cell = phys.m(phic)
    m_face = face_average(grid, m_cell)
    diff_face = tuple(np.clip(D, 0.0, None) for D in _diffusion_faces(phic, params, m_cell, a))

    flux = []
    adv = []
    for d in range(grid.dims):
        h = grid.spacing[d]
        p_lo, p_hi = _faces(phi, d)
        a_lo, a_hi = _faces(a, d)
        v = (B * 0.5 * (p_lo + p_hi) * (a_hi - a_lo) - B * np.diff(Jphi, axis=d) - chi * np.diff(state.sigma, axis=d)) / h
        if params.upwind:
            m_lo, m_hi = _faces(m_cell, d)
            m_adv = np.where(v > 0, m_hi, m_lo)
        else:
            m_adv = m_face[d]
        adv.append(m_adv * v)
        flux.append(diff_face[d] * (p_hi - p_lo) / h + m_adv * v)

    P = phys.P(phic)
    S = P * ((1 + chi) * state.sigma + chi * (1 - phi) - B * a * phi + B * Jphi) - A * phys.p_psi1(phic)
    dphi = divergence(grid, flux) + S
    n_face, dsigma = _nutrient_part(state, params, phic, S)

    mu = None
    if float(np.max(np.abs(phic))) < 1.0:
        mu = A * phys.dpsi(phic) + B * (a * phi - Jphi) - chi * state.sigma

    if np.any(P):
        inner = np.abs(phic) < 1 - GUARD
        d2 = np.where(inner, A * phys.d2psi(np.where(inner, phic, 0.0)), 0.0) + B * a
        rate = _reaction_rate(np.where(inner, P, 0.0), params, d2)
    else:
        rate = 0.0
    return Assembly(dphi, dsigma, S, mu, m_face, n_face, diff_face, tuple(adv), rate)
