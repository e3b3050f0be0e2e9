"""First-order time integration with a coefficient-based stability limit."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .grid import apply_divgrad
from .model import Assembly, ModelParams, State, assemble

SCHEMES = ("explicit-euler", "imex-lagged")


class LinearSolverError(RuntimeError):
    pass


class StepLimitError(RuntimeError):
    pass


@dataclass
class StepperConfig:
    scheme: str = "explicit-euler"
    dt: float = 1e-3
    safety: float = 0.9
    t_end: float = 1.0
    adapt: bool = True
    max_steps: int = 1_000_000

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"scheme must be one of {SCHEMES}")
        if not self.dt > 0:
            raise ValueError("dt must be positive")
        if not 0 < self.safety <= 1:
            raise ValueError("safety must lie in (0, 1]")
        if self.max_steps < 1:
            raise ValueError("max_steps must be positive")


def stable_dt(state: State, params: ModelParams, safety: float = 1.0, asm: Assembly | None = None) -> float:
    """``safety / (2 d C_max / h^2 + R / 2)``.

    ``C_max`` is the largest parabolic face coefficient (``|m (A Psi'' + B a)|``
    or ``n``) plus ``h |m v|`` from the non-gradient flux, ``R`` a bound on the
    reaction Jacobian.  With ``R = 0`` this is ``safety h^2 / (2 d C_max)``.
    """
    asm = asm or assemble(state, params)
    grid = params.grid
    h = grid.h_min
    parab = max(
        max((float(np.max(np.abs(D))) for D in asm.diff_face), default=0.0),
        max((float(np.max(np.abs(n))) for n in asm.n_face), default=0.0),
    )
    adv = max((float(np.max(np.abs(v))) for v in asm.adv_face), default=0.0)
    c_max = parab + h * adv
    if not (np.isfinite(c_max) and np.isfinite(asm.reaction_rate)):
        raise ValueError("non-finite coefficient while computing the stable step")
    rate = 2 * grid.dims * c_max / h**2 + 0.5 * asm.reaction_rate
    if rate <= 0:
        return float("inf")
    return safety / rate


def _implicit_solve(params: ModelParams, coef, rhs: np.ndarray, x0: np.ndarray, dt: float) -> np.ndarray:
    """Solve ``(I - dt div(coef grad)) u = rhs`` with conjugate gradients."""
    grid = params.grid
    shape = grid.cells
    N = grid.size

    def matvec(x):
        u = x.reshape(shape)
        return (u - dt * apply_divgrad(grid, coef, u)).ravel()

    op = spla.LinearOperator((N, N), matvec=matvec, dtype=float)
    sol, info = spla.cg(op, rhs.ravel(), x0=x0.ravel(), rtol=1e-10, atol=0.0, maxiter=10 * N)
    if info != 0:
        raise LinearSolverError(f"conjugate gradients did not converge (info={info})")
    return sol.reshape(shape)


def advance(state: State, params: ModelParams, asm: Assembly, dt: float, scheme: str) -> State:
    if scheme == "explicit-euler":
        return State(state.t + dt, state.phi + dt * asm.dphi, state.sigma + dt * asm.dsigma)
    grid = params.grid
    D = tuple(np.clip(d, 0.0, None) for d in asm.diff_face)
    # explicit part: everything except the frozen-coefficient diffusion of the unknown
    phi_rhs = state.phi + dt * (asm.dphi - apply_divgrad(grid, D, state.phi))
    sig_rhs = state.sigma + dt * (asm.dsigma - apply_divgrad(grid, asm.n_face, state.sigma))
    phi = _implicit_solve(params, D, phi_rhs, state.phi, dt)
    sigma = _implicit_solve(params, asm.n_face, sig_rhs, state.sigma, dt)
    return State(state.t + dt, phi, sigma)


def choose_dt(state: State, params: ModelParams, cfg: StepperConfig, asm: Assembly) -> float:
    dt = cfg.dt
    if cfg.adapt and cfg.scheme == "explicit-euler":
        dt = min(dt, stable_dt(state, params, cfg.safety, asm))
    return dt


def step(state: State, params: ModelParams, cfg: StepperConfig) -> State:
    asm = assemble(state, params)
    return advance(state, params, asm, choose_dt(state, params, cfg, asm), cfg.scheme)


@dataclass
class Trajectory:
    times: list[float] = field(default_factory=list)
    states: list[State] = field(default_factory=list)
    dts: list[float] = field(default_factory=list)
    steps: int = 0


def integrate(initial: State, params: ModelParams, cfg: StepperConfig, monitors=None,
              save_every: int = 1, keep_states: bool = True) -> Trajectory:
    """March from ``initial.t`` to ``cfg.t_end``.

    ``monitors`` (optional) gets ``start(state, params)`` once and
    ``after_step(prev, asm, dt, new)`` after every accepted step.  States are
    stored every ``save_every`` steps and always at the final time.
    """
    if cfg.t_end < initial.t:
        raise ValueError("t_end precedes the initial time")
    state = initial.copy()
    traj = Trajectory([state.t], [state.copy()] if keep_states else [])
    if monitors is not None:
        monitors.start(state, params)
    tol = 1e-12 * max(1.0, abs(cfg.t_end))
    k = 0
    while cfg.t_end - state.t > tol:
        if k >= cfg.max_steps:
            raise StepLimitError(f"max_steps={cfg.max_steps} reached at t={state.t:.6g}")
        asm = assemble(state, params)
        dt = min(choose_dt(state, params, cfg, asm), cfg.t_end - state.t)
        new = advance(state, params, asm, dt, cfg.scheme)
        if cfg.t_end - new.t <= tol:
            new.t = cfg.t_end
        if not (np.all(np.isfinite(new.phi)) and np.all(np.isfinite(new.sigma))):
            raise FloatingPointError(f"non-finite state at t={new.t:.6g}")
        k += 1
        if monitors is not None:
            monitors.after_step(state, asm, dt, new)
        traj.dts.append(dt)
        state = new
        final = cfg.t_end - state.t <= tol
        if k % save_every == 0 or final:
            traj.times.append(state.t)
            if keep_states:
                traj.states.append(state.copy())
    traj.steps = k
    if monitors is not None and hasattr(monitors, "finish"):
        monitors.finish(state)
    if not keep_states:
        traj.states.append(state.copy())
    return traj
