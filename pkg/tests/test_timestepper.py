import numpy as np
import pytest

from nlch.grid import build_grid, integrate
from nlch.kernel import build_kernel
from nlch.model import ModelParams, State, assemble
from nlch.monitors import MonitorSeries
from nlch.physics import (ConstantMobility, CustomMobility, DegenerateMobility, LogarithmicPotential,
                          Physics, PolynomialPotential, TwoSidedProliferation)
from nlch.timestepper import StepLimitError, StepperConfig, advance, integrate as march, stable_dt, step

from conftest import gaussian, smooth_state


def heat_params(n, dims=1, n0=1.0):
    g = build_grid([1.0] * dims, [n] * dims)
    zero_m = CustomMobility(lambda s: 0 * s)
    return ModelParams(g, build_kernel("delta", {"weight": 1.0}, g),
                       Physics(PolynomialPotential.quartic(), zero_m, ConstantMobility(n0)))


def test_config_validation():
    with pytest.raises(ValueError):
        StepperConfig(scheme="rk4")
    with pytest.raises(ValueError):
        StepperConfig(dt=0)
    with pytest.raises(ValueError):
        StepperConfig(safety=1.5)


@pytest.mark.parametrize("dims", [1, 2])
def test_pure_heat_stable_dt(dims):
    p = heat_params(16, dims)
    s = smooth_state(p.grid)
    h = p.grid.spacing[0]
    assert stable_dt(s, p, 0.9) == pytest.approx(0.9 * h**2 / (2 * dims), rel=1e-12)
    fine = heat_params(32, dims)
    assert stable_dt(smooth_state(fine.grid), fine, 0.9) == pytest.approx(stable_dt(s, p, 0.9) / 4, rel=1e-12)


def test_pure_phase_dt_set_by_nutrient(degenerate_params):
    g = degenerate_params.grid
    for v in (1.0, -1.0):
        s = State(0, np.full(g.cells, v), np.cos(np.pi * g.centers(0)))
        h = g.spacing[0]
        assert stable_dt(s, degenerate_params, 0.5) == pytest.approx(0.5 * h**2 / 2, rel=1e-12)


def test_equilibrium_unchanged(grid1):
    p = ModelParams(grid1, gaussian(grid1), Physics(PolynomialPotential.quartic(), ConstantMobility()))
    s = State(0, np.full(grid1.cells, 0.3), np.full(grid1.cells, 0.1))
    new = step(s, p, StepperConfig(dt=1e-4))
    assert np.max(np.abs(new.phi - s.phi)) < 1e-15 and np.max(np.abs(new.sigma - s.sigma)) < 1e-15


def test_explicit_step_definition(quartic_params):
    s = smooth_state(quartic_params.grid)
    asm = assemble(s, quartic_params)
    new = advance(s, quartic_params, asm, 1e-5, "explicit-euler")
    assert np.array_equal(new.phi, s.phi + 1e-5 * asm.dphi)
    assert np.array_equal(new.sigma, s.sigma + 1e-5 * asm.dsigma)
    assert new.t == 1e-5


def test_imex_heat_amplification():
    p = heat_params(32)
    g = p.grid
    h = g.spacing[0]
    u = np.cos(3 * np.pi * g.centers(0))
    lam = 2 / h**2 * (1 - np.cos(3 * np.pi * h))
    dt = 100 * h**2
    s = State(0, g.zeros(), u.copy())
    amps = []
    for _ in range(5):
        s = step(s, p, StepperConfig(scheme="imex-lagged", dt=dt))
        amps.append(s.sigma[0])
    factors = np.array(amps) / np.concatenate([[u[0]], amps[:-1]])
    assert np.allclose(factors, 1 / (1 + dt * lam), rtol=1e-8)
    assert np.all(np.diff(np.abs(amps)) < 0)


def test_imex_degenerate_step_conserves_mass(degenerate_params):
    s = smooth_state(degenerate_params.grid, amp=0.7)
    new = step(s, degenerate_params, StepperConfig(scheme="imex-lagged", dt=1e-3))
    g = degenerate_params.grid
    assert integrate(g, new.phi + new.sigma) == pytest.approx(integrate(g, s.phi + s.sigma), rel=1e-9)


def test_zero_length_interval(quartic_params):
    s = smooth_state(quartic_params.grid)
    tr = march(s, quartic_params, StepperConfig(t_end=0.0))
    assert tr.times == [0.0] and len(tr.states) == 1 and tr.steps == 0


def test_hits_end_time_exactly(quartic_params):
    s = smooth_state(quartic_params.grid)
    tr = march(s, quartic_params, StepperConfig(dt=3e-4, t_end=1e-3, adapt=False))
    assert tr.times[-1] == 1e-3 and tr.steps == 4
    assert tr.dts[-1] == pytest.approx(1e-4)


def test_step_limit(quartic_params):
    with pytest.raises(StepLimitError):
        march(smooth_state(quartic_params.grid), quartic_params, StepperConfig(dt=1e-6, t_end=1.0, max_steps=3))


def test_blow_up_is_reported(quartic_params):
    with np.errstate(all="ignore"), pytest.raises((FloatingPointError, ValueError)):
        march(smooth_state(quartic_params.grid, amp=1.0), quartic_params,
              StepperConfig(dt=0.05, t_end=50.0, adapt=False))


def test_species_masses_conserved_without_source():
    g = build_grid([1.0], [32])
    p = ModelParams(g, gaussian(g, mass=2.0), Physics(PolynomialPotential.quartic(), ConstantMobility()), B=2.0)
    s = smooth_state(g, amp=0.2)
    dt = 0.5 * stable_dt(s, p)
    tr = march(s, p, StepperConfig(dt=dt, t_end=1000 * dt, adapt=False), keep_states=False)
    assert tr.steps >= 1000
    end = tr.states[-1]
    for a, b in ((s.phi, end.phi), (s.sigma, end.sigma)):
        assert abs(integrate(g, b) - integrate(g, a)) <= 1e-11 * integrate(g, np.abs(a))
