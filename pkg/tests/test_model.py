import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlch.grid import build_grid, integrate, laplacian
from nlch.kernel import build_kernel, convolve, kernel_mass
from nlch.model import (ConfinementError, ModelParams, State, assemble, chemical_potential, rhs_degenerate,
                        rhs_nondegenerate, source)
from nlch.physics import (ConstantMobility, DegenerateMobility, LogarithmicPotential, OneSidedProliferation,
                          Physics, PolynomialPotential, TwoSidedProliferation, ZeroProliferation, regularize)

from conftest import gaussian, smooth_state


def test_params_validation(quartic_params):
    with pytest.raises(ValueError):
        ModelParams(quartic_params.grid, quartic_params.kernel, quartic_params.physics, A=0.0)
    with pytest.raises(ValueError):
        ModelParams(quartic_params.grid, quartic_params.kernel, quartic_params.physics, chi=-1.0)
    with pytest.raises(ValueError):
        ModelParams(quartic_params.grid, quartic_params.kernel, quartic_params.physics, formulation="degenerate")


def test_mu_delta_kernel_cancels_nonlocal_part(grid1):
    k = build_kernel("delta", {"weight": 1.3}, grid1)
    p = ModelParams(grid1, k, Physics(PolynomialPotential.quartic(), ConstantMobility()), A=2.0, B=1.0)
    phi = np.full(grid1.cells, 0.4)
    mu = chemical_potential(State(0, phi, grid1.zeros()), p)
    assert np.allclose(mu, 2.0 * (0.4**3 - 0.4), atol=1e-15)


def test_mu_zero_phase(quartic_params):
    g = quartic_params.grid
    mu = chemical_potential(State(0, g.zeros(), np.full(g.cells, 0.7)), quartic_params)
    assert np.allclose(mu, -0.2 * 0.7, atol=1e-15)


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_mu_mean_by_fubini(seed):
    g = build_grid([1.0], [40])
    phys = Physics(PolynomialPotential.quartic(), ConstantMobility())
    p = ModelParams(g, gaussian(g, width=0.07, mass=3.0), phys, A=1.5, B=2.0, chi=0.3)
    rng = np.random.default_rng(seed)
    s = State(0, rng.uniform(-1, 1, g.cells), rng.uniform(0, 1, g.cells))
    mu = chemical_potential(s, p)
    expect = 1.5 * integrate(g, phys.dpsi(s.phi)) - 0.3 * integrate(g, s.sigma)
    scale = 1 + integrate(g, np.abs(phys.dpsi(s.phi))) + integrate(g, np.abs(kernel_mass(p.kernel) * s.phi))
    assert abs(integrate(g, mu) - expect) <= 1e-12 * scale


def test_source_cases(grid1):
    k = gaussian(grid1)
    zero = ModelParams(grid1, k, Physics(PolynomialPotential.quartic(), ConstantMobility()))
    s = smooth_state(grid1)
    assert np.array_equal(source(s, zero, chemical_potential(s, zero)), grid1.zeros())
    one = ModelParams(grid1, k, Physics(PolynomialPotential.quartic(), ConstantMobility(), ConstantMobility(),
                                        OneSidedProliferation(1.0)), chi=0.4)
    mu = s.sigma + 0.4 * (1 - s.phi)
    assert np.allclose(source(s, one, mu), 0.0, atol=0)
    healthy = State(0, np.full(grid1.cells, -1.0), np.full(grid1.cells, 3.0))
    assert np.array_equal(source(healthy, one, np.full(grid1.cells, -5.0)), grid1.zeros())


def test_constant_state_is_stationary(grid1):
    p = ModelParams(grid1, gaussian(grid1), Physics(PolynomialPotential.quartic(), ConstantMobility()))
    dphi, dsig = rhs_nondegenerate(State(0, np.full(grid1.cells, 0.2), np.full(grid1.cells, 0.5)), p)
    assert np.max(np.abs(dphi)) < 1e-12 and np.max(np.abs(dsig)) < 1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.booleans())
def test_total_mass_rate_vanishes(seed, degenerate):
    g = build_grid([1.0, 1.0], [10, 12])
    rng = np.random.default_rng(seed)
    if degenerate:
        phys = Physics(LogarithmicPotential(1.0, 3.0), DegenerateMobility(), ConstantMobility(), TwoSidedProliferation())
        p = ModelParams(g, gaussian(g, width=0.1), phys, formulation="degenerate")
        phi = rng.uniform(-0.99, 0.99, g.cells)
    else:
        phys = Physics(PolynomialPotential.quartic(), ConstantMobility(), ConstantMobility(2.0), TwoSidedProliferation())
        p = ModelParams(g, gaussian(g, width=0.1), phys, chi=0.5)
        phi = rng.uniform(-1.5, 1.5, g.cells)
    asm = assemble(State(0, phi, rng.uniform(0, 2, g.cells)), p)
    scale = integrate(g, np.abs(asm.dphi) + np.abs(asm.dsigma)) + 1
    assert abs(integrate(g, asm.dphi + asm.dsigma)) <= 1e-13 * scale


def test_nutrient_heat_mode_decay():
    errs = []
    for n in (32, 64):
        g = build_grid([2.0], [n])
        p = ModelParams(g, gaussian(g, width=0.1), Physics(PolynomialPotential.quartic(), ConstantMobility()))
        u = np.cos(2 * np.pi * g.centers(0) / 2.0)
        _, dsig = rhs_nondegenerate(State(0, g.zeros(), u), p)
        assert np.allclose(dsig, laplacian(g, u), atol=1e-12)
        rate = dsig[0] / u[0]
        errs.append(abs(rate + np.pi**2))
    assert errs[0] / errs[1] == pytest.approx(4, rel=0.05)


def test_pure_tumour_switches_off(degenerate_params):
    g = degenerate_params.grid
    sigma = np.cos(np.pi * g.centers(0))
    asm = assemble(State(0, g.ones(), sigma), degenerate_params)
    assert np.array_equal(asm.dphi, g.zeros())
    assert np.allclose(asm.dsigma, laplacian(g, sigma), atol=1e-12)
    assert asm.mu is None


def test_degenerate_zero_state(grid1):
    k = build_kernel("delta", {"weight": 1.0}, grid1)
    phys = Physics(LogarithmicPotential(1.0, 2.0), DegenerateMobility(), ConstantMobility(), TwoSidedProliferation())
    p = ModelParams(grid1, k, phys, formulation="degenerate")
    dphi, dsig = rhs_degenerate(State(0, grid1.zeros(), grid1.zeros()), p)
    assert np.array_equal(dphi, grid1.zeros()) and np.array_equal(dsig, grid1.zeros())


def test_confinement_error(degenerate_params):
    g = degenerate_params.grid
    phi = np.full(g.cells, 0.5)
    phi[3] = 1 + 1e-3
    with pytest.raises(ConfinementError):
        assemble(State(0, phi, g.zeros()), degenerate_params)
    phi[3] = 1 + 1e-8
    assemble(State(0, phi, g.zeros()), degenerate_params)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from([0.1, 0.05, 0.0125]), st.booleans())
def test_cross_formulation_agreement(seed, eps, upwind):
    g = build_grid([1.0], [40])
    base = Physics(LogarithmicPotential(1.0, 3.0), DegenerateMobility(), ConstantMobility(1.5), TwoSidedProliferation(0.7))
    k = gaussian(g, width=0.08, mass=8.0)  # A Psi'' + B a > 0, so the face coefficient is never clipped
    deg = ModelParams(g, k, base, A=1.2, B=0.8, chi=0.0, formulation="degenerate")
    reg = ModelParams(g, k, regularize(base, eps), A=1.2, B=0.8, chi=0.0)
    rng = np.random.default_rng(seed)
    s = State(0, rng.uniform(-1 + 2 * eps, 1 - 2 * eps, g.cells), rng.uniform(0, 1, g.cells))
    d1, s1 = rhs_degenerate(s, deg)
    d2, s2 = rhs_nondegenerate(s, reg)
    scale = 1 + np.max(np.abs(d2))
    assert np.max(np.abs(d1 - d2)) <= 1e-11 * scale
    assert np.max(np.abs(s1 - s2)) <= 1e-11 * (1 + np.max(np.abs(s2)))


def test_upwind_variant_conserves_mass(degenerate_params):
    from dataclasses import replace
    p = replace(degenerate_params, upwind=True)
    s = smooth_state(p.grid, amp=0.8)
    asm = assemble(s, p)
    assert abs(integrate(p.grid, asm.dphi + asm.dsigma)) < 1e-12
