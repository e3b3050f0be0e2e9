"""Energy, dissipation, entropy, mass and confinement functionals, plus the CSV record format."""

from __future__ import annotations

import csv
from dataclasses import astuple, dataclass

import numpy as np

from .grid import dual_norm, face_average, integrate as integral, l2_norm
from .kernel import convolve, kernel_mass
from .model import Assembly, ModelParams, State, assemble
from .physics import CLAMP, RegularizedPhysics, entropy as exact_entropy

COLUMNS = ("t", "E", "D_m", "D_n", "D_P", "entropy", "mass_phi", "mass_sigma",
           "mass_total", "phi_min", "phi_max", "deviation", "residual")


@dataclass
class MonitorRecord:
    t: float
    E: float
    D_m: float
    D_n: float
    D_P: float
    entropy: float
    mass_phi: float
    mass_sigma: float
    mass_total: float
    phi_min: float
    phi_max: float
    deviation: float
    residual: float

    def row(self) -> tuple[float, ...]:
        return astuple(self)


def _potential_value(state: State, params: ModelParams) -> np.ndarray:
    phys = params.physics
    if params.formulation == "degenerate":
        # the logarithmic value is finite on the closed interval
        return phys.potential(np.clip(state.phi, -1.0, 1.0))[0]
    return phys.psi(state.phi)


def energy(state: State, params: ModelParams) -> float:
    """``int A Psi + (B/2) a phi^2 - (B/2) phi J*phi + sigma^2/2 + chi sigma (1 - phi)``."""
    grid, k = params.grid, params.kernel
    phi, sig = state.phi, state.sigma
    dens = (
        params.A * _potential_value(state, params)
        + 0.5 * params.B * (kernel_mass(k) * phi**2 - phi * convolve(k, phi))
        + 0.5 * sig**2
        + params.chi * sig * (1 - phi)
    )
    return integral(grid, dens)


def nonlocal_pair_direct(grid, kernel, phi: np.ndarray) -> float:
    """``(1/4) sum_ij J(x_i - x_j) (phi_i - phi_j)^2 v^2`` by explicit double sum."""
    x = np.stack([c.ravel() for c in grid.mesh()], axis=1)
    f = phi.ravel()
    idx = np.round((x[:, None, :] - x[None, :, :]) / np.array(grid.spacing)).astype(int)
    idx += np.array(grid.cells) - 1
    J = kernel.samples[tuple(idx[..., d] for d in range(grid.dims))]
    return 0.25 * float(np.sum(J * (f[:, None] - f[None, :]) ** 2)) * grid.cell_volume**2


def dissipations(state: State, params: ModelParams, mu: np.ndarray) -> tuple[float, float, float]:
    """``(||sqrt(m) grad mu||^2, ||sqrt(n) grad zeta||^2, ||sqrt(P)(zeta - mu)||^2)``, ``zeta = sigma + chi(1-phi)``."""
    grid, phys = params.grid, params.physics
    if mu is None:
        raise ValueError("dissipations need a finite chemical potential")
    phi_pt = np.clip(state.phi, -1.0, 1.0) if params.formulation == "degenerate" else state.phi
    zeta = state.sigma + params.chi * (1 - state.phi)
    v = grid.cell_volume
    m_face = face_average(grid, phys.m(phi_pt))
    n_face = face_average(grid, phys.n(phi_pt))
    D_m = D_n = 0.0
    for d in range(grid.dims):
        h = grid.spacing[d]
        D_m += float(np.sum(m_face[d] * (np.diff(mu, axis=d) / h) ** 2)) * v
        D_n += float(np.sum(n_face[d] * (np.diff(zeta, axis=d) / h) ** 2)) * v
    D_P = integral(grid, phys.P(phi_pt) * (zeta - mu) ** 2)
    return D_m, D_n, D_P


def energy_inequality_residual(energies, dts, dissipation_rates) -> np.ndarray:
    """``r_k = E_k + sum_{j<k} dt_j D_j - E_0`` with ``D_j`` the summed dissipation at step ``j``."""
    E = np.asarray(energies, dtype=float)
    dts = np.asarray(dts, dtype=float)
    D = np.asarray(dissipation_rates, dtype=float)
    if len(dts) != len(E) - 1 or len(D) < len(dts) or not np.all(np.isfinite(D[: len(dts)])):
        raise ValueError("missing dissipation records")
    acc = np.concatenate([[0.0], np.cumsum(dts * D[: len(dts)])])
    return E + acc - E[0]


def deviation(grid, phi: np.ndarray) -> float:
    return integral(grid, np.clip(np.abs(phi) - 1.0, 0.0, None) ** 2)


def entropy_integral(state: State, params: ModelParams) -> float:
    phys = params.physics
    if isinstance(phys, RegularizedPhysics):
        return integral(params.grid, phys.entropy(state.phi)[0])
    if phys.degenerate:
        s = np.clip(state.phi, -1 + CLAMP, 1 - CLAMP)
        return integral(params.grid, exact_entropy(phys.mobility, s)[0])
    return integral(params.grid, phys.entropy(state.phi)[0])


def entropy_and_confinement(state: State, params: ModelParams) -> tuple[float, float, float, float]:
    return (entropy_integral(state, params), deviation(params.grid, state.phi),
            float(np.min(state.phi)), float(np.max(state.phi)))


def deviation_bound(state: State, params: ModelParams, eps: float, slack: float = 1e-9) -> tuple[float, float, bool]:
    """Check ``int (|phi|-1)_+^2 <= 2 max(m(-1+eps), m(1-eps)) int M(clamp(phi))``."""
    phys = params.physics
    base = phys.base if isinstance(phys, RegularizedPhysics) else phys
    lhs = deviation(params.grid, state.phi)
    s = np.clip(state.phi, -1 + CLAMP, 1 - CLAMP)
    M = integral(params.grid, exact_entropy(base.mobility, s)[0])
    m_end = float(max(base.m(np.array(-1 + eps)), base.m(np.array(1 - eps))))
    rhs = 2 * m_end * M
    return lhs, rhs, bool(lhs <= rhs + slack)


def pair_distance(grid, a: State, b: State) -> tuple[float, float, float, float]:
    grid.check(a.phi, b.phi, a.sigma, b.sigma)
    if abs(a.t - b.t) > 1e-12 * max(1.0, abs(a.t)):
        raise ValueError("states are at different times")
    dp, ds = a.phi - b.phi, a.sigma - b.sigma
    return dual_norm(grid, dp), dual_norm(grid, ds), l2_norm(grid, dp), l2_norm(grid, ds)


class MonitorSeries:
    """Collects a MonitorRecord every ``cadence`` accepted steps.

    With ``per_step`` the energy and the dissipation are evaluated after every
    accepted step and the residual column accumulates the left-point
    dissipation of every step.  Without it only recorded states are evaluated
    and the residual column is NaN.
    """

    def __init__(self, cadence: int = 1, with_dissipation: bool = True, per_step: bool = True):
        if cadence < 1:
            raise ValueError("cadence must be positive")
        self.cadence = cadence
        self.with_dissipation = with_dissipation
        self.per_step = per_step and with_dissipation
        self.records: list[MonitorRecord] = []
        self.step_energies: list[float] = []
        self.step_dissipation: list[float] = []
        self.dts: list[float] = []

    def _record(self, state, params, diss, residual, E=None) -> MonitorRecord:
        ent, dev, lo, hi = entropy_and_confinement(state, params)
        mp, ms = integral(params.grid, state.phi), integral(params.grid, state.sigma)
        E = energy(state, params) if E is None else E
        rec = MonitorRecord(state.t, E, *diss, ent, mp, ms, mp + ms, lo, hi, dev, residual)
        self.records.append(rec)
        return rec

    def _diss(self, state, params, asm: Assembly | None):
        if not self.with_dissipation:
            return (np.nan, np.nan, np.nan)
        asm = asm or assemble(state, params)
        if asm.mu is None:
            return (np.nan, np.nan, np.nan)
        return dissipations(state, params, asm.mu)

    def start(self, state: State, params: ModelParams) -> None:
        self.params = params
        self._k = 0
        self._acc = 0.0
        self._last = (state, self._diss(state, params, None))
        rec = self._record(state, params, self._last[1], 0.0)
        self._E0 = rec.E
        self.step_energies.append(rec.E)

    def after_step(self, prev: State, asm: Assembly, dt: float, new: State) -> None:
        params = self.params
        self._k += 1
        self.dts.append(dt)
        recording = self._k % self.cadence == 0
        if not self.per_step:
            if recording:
                self._record(new, params, self._diss(new, params, None), np.nan)
            return
        diss = self._last[1] if self._last[0] is prev else self._diss(prev, params, asm)
        total = float(sum(diss))
        self.step_dissipation.append(total)
        self._acc += dt * total
        E = energy(new, params)
        self.step_energies.append(E)
        if recording:
            nd = self._diss(new, params, None)
            self._last = (new, nd)
            self._record(new, params, nd, E + self._acc - self._E0, E)

    def finish(self, state: State) -> None:
        """Ensure the final state is recorded."""
        if self.records and self.records[-1].t == state.t:
            return
        nd = self._diss(state, self.params, None)
        if self.per_step:
            E = self.step_energies[-1]
            self._record(state, self.params, nd, E + self._acc - self._E0, E)
        else:
            self._record(state, self.params, nd, np.nan)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.records])


def write_csv(path, records) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(COLUMNS)
        for r in records:
            w.writerow(["%.17g" % x for x in r.row()])


def read_csv(path) -> list[MonitorRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if tuple(rows[0]) != COLUMNS:
        raise ValueError(f"unexpected monitor columns {rows[0]}")
    return [MonitorRecord(*(float(x) for x in row)) for row in rows[1:]]
