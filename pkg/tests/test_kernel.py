import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from nlch.grid import build_grid, inner_product, l2_norm
from nlch.kernel import (build_kernel, convolve, direct_convolve, grad_convolve, kernel_bounds, kernel_mass)

from conftest import gaussian


def test_delta_kernel(grid2):
    k = build_kernel("delta", {"weight": 0.7}, grid2)
    f = np.random.default_rng(0).standard_normal(grid2.cells)
    assert np.allclose(convolve(k, f), 0.7 * f, rtol=0, atol=1e-15)
    assert np.allclose(kernel_mass(k), 0.7)
    b = kernel_bounds(k)
    assert b.a_star == pytest.approx(0.7) and b.a_lower == pytest.approx(0.7) and b.b == 0.0


def test_gaussian_samples_symmetric(grid2):
    s = gaussian(grid2).samples
    assert np.array_equal(s, s[::-1, ::-1])


def test_unknown_kind_and_bad_width(grid1):
    with pytest.raises(ValueError):
        build_kernel("triangle", {}, grid1)
    with pytest.raises(ValueError):
        build_kernel("gaussian", {"width": 0.0}, grid1)


def test_gaussian_mass_interior_and_boundary():
    g = build_grid([4.0], [400])
    w, amp = 0.1, 3.0
    k = build_kernel("gaussian", {"width": w, "amplitude": amp}, g)
    a = kernel_mass(k)
    centre = a[200]
    assert centre == pytest.approx(amp * np.sqrt(2 * np.pi) * w, rel=1e-10)
    # half the mass is lost at a wall
    assert a[0] < 0.6 * centre
    b = kernel_bounds(k)
    assert b.a_star >= b.a_lower
    assert np.argmin(a) in (0, len(a) - 1)


def test_kernel_mass_lower_bound_at_corner(grid2):
    a = kernel_mass(gaussian(grid2, width=0.1))
    assert a.min() == pytest.approx(a[0, 0]) and a.min() >= 0
    assert a.max() > a[0, 0]


def test_convolve_one_is_mass(grid2):
    k = gaussian(grid2, width=0.08)
    assert np.allclose(convolve(k, grid2.ones()), kernel_mass(k), atol=1e-14)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 2**31), st.sampled_from(["gaussian", "compact"]), st.sampled_from([(23,), (9, 7)]))
def test_fft_matches_direct_sum(seed, kind, cells):
    g = build_grid([1.0] * len(cells), cells)
    k = build_kernel(kind, {"width": 0.2, "amplitude": 1.3}, g)
    f = np.random.default_rng(seed).standard_normal(cells)
    ref = direct_convolve(g, k.samples, f)
    assert np.max(np.abs(convolve(k, f) - ref)) <= 1e-12 * np.max(np.abs(ref))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31))
def test_fubini_identity(seed):
    g = build_grid([1.0, 0.7], [11, 9])
    k = gaussian(g, width=0.15)
    f = np.random.default_rng(seed).standard_normal(g.cells)
    # both sides by explicit double sums
    lhs = inner_product(g, direct_convolve(g, k.samples, f), g.ones())
    rhs = inner_product(g, direct_convolve(g, k.samples, g.ones()) * f, g.ones())
    assert abs(lhs - rhs) <= 1e-12 * (abs(lhs) + inner_product(g, np.abs(f), kernel_mass(k)))
    assert inner_product(g, convolve(k, f), g.ones()) == pytest.approx(lhs, rel=1e-12, abs=1e-13)


def test_grad_convolve_of_one_is_gradient_of_mass():
    errs = []
    for n in (80, 160):
        g = build_grid([1.0], [n])
        k = build_kernel("gaussian", {"width": 0.1, "amplitude": 1.0}, g)
        gc = grad_convolve(k, g.ones())[0]
        fd = np.gradient(kernel_mass(k), g.spacing[0], edge_order=2)
        errs.append(np.max(np.abs(gc - fd)))
    assert errs[1] < errs[0] / 3


def test_grad_convolve_zero_and_young_bound(grid2):
    k = gaussian(grid2, width=0.1)
    assert all(np.all(c == 0) for c in grad_convolve(k, grid2.zeros()))
    f = np.random.default_rng(3).standard_normal(grid2.cells)
    b = kernel_bounds(k).b
    for comp in grad_convolve(k, f):
        assert l2_norm(grid2, comp) <= b * l2_norm(grid2, f) * (1 + 1e-10)
