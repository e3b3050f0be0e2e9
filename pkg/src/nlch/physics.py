"""Constitutive functions and their regularisations.

Every evaluator is vectorised over numpy arrays.  Potential families return
``(value, first, second)`` triples.  A physics object (``Physics`` or
``RegularizedPhysics``) exposes the same duck-typed surface used by the
model assembly:

    psi, dpsi, d2psi, m, n, P, m_psi2, p_psi1, entropy, singular, degenerate
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.integrate
from numpy.polynomial import Polynomial
from scipy.special import xlogy

GUARD = 1e-8
CLAMP = 1e-12


class PotentialDomainError(ValueError):
    """A singular potential was evaluated outside (-1, 1)."""


def _arr(s) -> np.ndarray:
    return np.asarray(s, dtype=float)


# ---------------------------------------------------------------------------
# potentials


class Potential:
    kind = "abstract"
    singular = False

    def psi1(self, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        raise NotImplementedError

    def psi2(self, s) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        s = _arr(s)
        z = np.zeros_like(s)
        return z, z.copy(), z.copy()

    def __call__(self, s):
        v1, d1, e1 = self.psi1(s)
        v2, d2, e2 = self.psi2(s)
        return v1 + v2, d1 + d2, e1 + e2


class PolynomialPotential(Potential):
    """``Psi(s) = sum_k coeffs[k] s^k`` on the whole real line (``Psi_2 = 0``)."""

    kind = "polynomial"

    def __init__(self, coeffs):
        self.poly = Polynomial(np.asarray(coeffs, dtype=float)).trim()
        self.d1 = self.poly.deriv(1)
        self.d2 = self.poly.deriv(2)

    @classmethod
    def quartic(cls) -> "PolynomialPotential":
        # (1 - s^2)^2 / 4
        return cls([0.25, 0.0, -0.5, 0.0, 0.25])

    @property
    def degree(self) -> int:
        return self.poly.degree()

    @property
    def leading(self) -> float:
        return float(self.poly.coef[-1])

    def psi1(self, s):
        s = _arr(s)
        return self.poly(s), self.d1(s), self.d2(s)


class LogarithmicPotential(Potential):
    """``(theta/2)((1+s)ln(1+s) + (1-s)ln(1-s)) - (theta_c/2) s^2`` on (-1, 1)."""

    kind = "logarithmic"
    singular = True

    def __init__(self, theta: float, theta_c: float):
        if not theta > 0:
            raise ValueError("theta must be positive")
        self.theta = float(theta)
        self.theta_c = float(theta_c)

    def psi1(self, s):
        s = _arr(s)
        th = self.theta
        v = 0.5 * th * (xlogy(1 + s, 1 + s) + xlogy(1 - s, 1 - s))
        d1 = th * np.arctanh(s)
        d2 = th / ((1 - s) * (1 + s))
        return v, d1, d2

    def psi2(self, s):
        s = _arr(s)
        tc = self.theta_c
        return -0.5 * tc * s**2, -tc * s, np.full_like(s, -tc)


def eval_potential(pot: Potential, s):
    """Value and first two derivatives; singular kinds refuse ``|s| >= 1``."""
    s = _arr(s)
    if pot.singular and np.any(np.abs(s) >= 1):
        raise PotentialDomainError(f"singular potential evaluated at |s| >= 1 (max |s| = {np.max(np.abs(s))})")
    out = pot(s)
    if not all(np.all(np.isfinite(o)) for o in out):
        raise PotentialDomainError("potential evaluation produced non-finite values")
    return out


# ---------------------------------------------------------------------------
# mobilities


class Mobility:
    kind = "abstract"
    degenerate = False

    def __call__(self, s) -> np.ndarray:
        raise NotImplementedError

    def entropy_closed(self, s):
        return None


class ConstantMobility(Mobility):
    kind = "constant"

    def __init__(self, m0: float = 1.0):
        if not m0 > 0:
            raise ValueError("constant mobility must be positive")
        self.m0 = float(m0)

    def __call__(self, s):
        return np.full_like(_arr(s), self.m0)

    def entropy_closed(self, s):
        s = _arr(s)
        return s**2 / (2 * self.m0), s / self.m0, np.full_like(s, 1.0 / self.m0)


class DegenerateMobility(Mobility):
    """``m0 (1 - s^2)``, clipped at zero outside [-1, 1]."""

    kind = "degenerate"
    degenerate = True

    def __init__(self, m0: float = 1.0):
        if not m0 > 0:
            raise ValueError("mobility prefactor must be positive")
        self.m0 = float(m0)

    def __call__(self, s):
        s = _arr(s)
        return self.m0 * np.clip((1 - s) * (1 + s), 0.0, None)

    def entropy_closed(self, s):
        s = _arr(s)
        if np.any(np.abs(s) >= 1):
            raise PotentialDomainError("entropy of a degenerate mobility needs |s| < 1")
        M = 0.5 * (xlogy(1 + s, 1 + s) + xlogy(1 - s, 1 - s)) / self.m0
        return M, np.arctanh(s) / self.m0, 1.0 / (self.m0 * (1 - s) * (1 + s))


class CustomMobility(Mobility):
    kind = "custom"

    def __init__(self, func: Callable, degenerate: bool = False):
        self.func = func
        self.degenerate = degenerate

    def __call__(self, s):
        return np.asarray(self.func(_arr(s)), dtype=float) * np.ones_like(_arr(s))


# ---------------------------------------------------------------------------
# proliferation


class Proliferation:
    kind = "abstract"
    P0 = 0.0

    def __call__(self, s) -> np.ndarray:
        raise NotImplementedError


class ZeroProliferation(Proliferation):
    kind = "zero"

    def __call__(self, s):
        return np.zeros_like(_arr(s))


class OneSidedProliferation(Proliferation):
    """``P0 (1 + s)_+``: active in the tumour phase only."""

    kind = "one-sided"

    def __init__(self, P0: float = 1.0):
        self.P0 = float(P0)

    def __call__(self, s):
        return self.P0 * np.clip(1 + _arr(s), 0.0, None)


class TwoSidedProliferation(Proliferation):
    """``P0 (1 - s^2)^2``: vanishes in both pure phases."""

    kind = "two-sided"

    def __init__(self, P0: float = 1.0):
        self.P0 = float(P0)

    def __call__(self, s):
        s = _arr(s)
        return self.P0 * ((1 - s) * (1 + s)) ** 2


class CustomProliferation(Proliferation):
    kind = "custom"

    def __init__(self, func: Callable):
        self.func = func

    def __call__(self, s):
        return np.asarray(self.func(_arr(s)), dtype=float) * np.ones_like(_arr(s))


# ---------------------------------------------------------------------------
# entropy


def entropy(mob: Mobility, s):
    """``(M, M', M'')`` with ``m M'' = 1`` and ``M(0) = M'(0) = 0``."""
    s = _arr(s)
    closed = mob.entropy_closed(s)
    if closed is not None:
        return closed
    return entropy_quadrature(mob, s)


def entropy_quadrature(mob: Mobility, s):
    """Adaptive Gauss-Kronrod evaluation of the entropy from ``1/m``."""
    s = _arr(s)

    def inv_m(r):
        return 1.0 / float(mob(r))

    def one(x):
        if mob.degenerate and abs(x) >= 1:
            raise PotentialDomainError("entropy of a degenerate mobility needs |s| < 1")
        d1, _ = scipy.integrate.quad(inv_m, 0.0, x, epsabs=1e-14, epsrel=1e-10, limit=200)
        v, _ = scipy.integrate.quad(lambda r: (x - r) * inv_m(r), 0.0, x, epsabs=1e-14, epsrel=1e-10, limit=200)
        return v, d1

    flat = s.ravel()
    vals = np.array([one(x) for x in flat]).reshape(flat.shape + (2,))
    M = vals[..., 0].reshape(s.shape)
    dM = vals[..., 1].reshape(s.shape)
    return M, dM, 1.0 / mob(s)


# ---------------------------------------------------------------------------
# continuous products


def _guarded(func: Callable, s: np.ndarray) -> np.ndarray:
    """Evaluate ``func`` inside |s| <= 1 - GUARD, extrapolate linearly in the strip."""
    s = _arr(s)
    out = np.empty_like(s)
    inner = np.abs(s) <= 1 - GUARD
    if np.any(inner):
        out[inner] = func(s[inner])
    strip = ~inner
    if np.any(strip):
        sign = np.sign(s[strip])
        sa = sign * (1 - GUARD)
        sb = sign * (1 - 2 * GUARD)
        fa, fb = func(sa), func(sb)
        out[strip] = fa + (fa - fb) / (sa - sb) * (s[strip] - sa)
    return out


def _is_deg_quadratic(mob) -> bool:
    return isinstance(mob, DegenerateMobility)


def product_m_psi2(phys: "Physics", s) -> np.ndarray:
    """``m Psi''`` continuously extended to [-1, 1]."""
    s = np.clip(_arr(s), -1.0, 1.0)
    pot, mob = phys.potential, phys.mobility
    if _is_deg_quadratic(mob) and isinstance(pot, LogarithmicPotential):
        return mob.m0 * (pot.theta - pot.theta_c * (1 - s) * (1 + s))
    if not pot.singular:
        return mob(s) * pot(s)[2]
    return product_m_psi2_generic(phys, s)


def product_m_psi2_generic(phys: "Physics", s) -> np.ndarray:
    return _guarded(lambda x: phys.mobility(x) * phys.potential(x)[2], np.clip(_arr(s), -1.0, 1.0))


def product_m_psi1_2(phys: "Physics", s) -> np.ndarray:
    """``m Psi_1''`` continuously extended to [-1, 1]."""
    s = np.clip(_arr(s), -1.0, 1.0)
    pot, mob = phys.potential, phys.mobility
    if _is_deg_quadratic(mob) and isinstance(pot, LogarithmicPotential):
        return np.full_like(s, mob.m0 * pot.theta)
    if not pot.singular:
        return mob(s) * pot.psi1(s)[2]
    return _guarded(lambda x: mob(x) * pot.psi1(x)[2], s)


def product_p_psi1(phys: "Physics", s) -> np.ndarray:
    """``P Psi'`` continuously extended to [-1, 1]."""
    s = np.clip(_arr(s), -1.0, 1.0)
    pot, prolif = phys.potential, phys.proliferation
    if isinstance(prolif, ZeroProliferation):
        return np.zeros_like(s)
    if isinstance(prolif, TwoSidedProliferation) and isinstance(pot, LogarithmicPotential):
        w = ((1 - s) * (1 + s)) ** 2
        log_ratio_part = 0.5 * pot.theta * (xlogy(w, 1 + s) - xlogy(w, 1 - s))
        return prolif.P0 * (log_ratio_part - pot.theta_c * s * w)
    return product_p_psi1_generic(phys, s)


def product_p_psi1_generic(phys: "Physics", s) -> np.ndarray:
    s = np.clip(_arr(s), -1.0, 1.0)
    if phys.potential.singular:
        s = np.clip(s, -1 + CLAMP, 1 - CLAMP)
    return phys.proliferation(s) * phys.potential(s)[1]


def product_sqrtp_mprime(phys, s) -> np.ndarray:
    """``sqrt(P) M'`` for base physics on [-1, 1] or regularised physics on R."""
    s = _arr(s)
    if isinstance(phys, RegularizedPhysics):
        return np.sqrt(phys.P(s)) * phys.entropy(s)[1]
    s = np.clip(s, -1.0, 1.0)
    prolif, mob = phys.proliferation, phys.mobility
    if isinstance(prolif, TwoSidedProliferation) and _is_deg_quadratic(mob):
        w = (1 - s) * (1 + s)
        return np.sqrt(prolif.P0) / mob.m0 * 0.5 * (xlogy(w, 1 + s) - xlogy(w, 1 - s))
    if mob.degenerate:
        s = np.clip(s, -1 + CLAMP, 1 - CLAMP)
    return np.sqrt(prolif(s)) * entropy(mob, s)[1]


def sqrtp_mprime_junction(reg: "RegularizedPhysics", s) -> np.ndarray:
    """Explicit piecewise form of ``sqrt(P_eps) M_eps'`` (linear outside the junction)."""
    base, e = reg.base, reg.eps
    s = _arr(s)
    out = np.empty_like(s)
    hi, lo = s >= 1 - e, s <= -1 + e
    mid = ~(hi | lo)
    out[mid] = np.sqrt(base.P(s[mid])) * entropy(base.mobility, s[mid])[1]
    for mask, j in ((hi, 1 - e), (lo, -1 + e)):
        if np.any(mask):
            sp = np.sqrt(float(base.P(j)))
            dM = float(entropy(base.mobility, j)[1])
            out[mask] = sp * dM + sp / float(base.m(j)) * (s[mask] - j)
    return out


# ---------------------------------------------------------------------------
# physics containers


@dataclass
class Physics:
    potential: Potential
    mobility: Mobility
    nutrient_mobility: Mobility = field(default_factory=ConstantMobility)
    proliferation: Proliferation = field(default_factory=ZeroProliferation)

    @property
    def singular(self) -> bool:
        return self.potential.singular

    @property
    def degenerate(self) -> bool:
        return self.mobility.degenerate

    def triple(self, s):
        return eval_potential(self.potential, s)

    def psi(self, s):
        return self.triple(s)[0]

    def dpsi(self, s):
        return self.triple(s)[1]

    def d2psi(self, s):
        return self.triple(s)[2]

    def m(self, s):
        return self.mobility(s)

    def n(self, s):
        return self.nutrient_mobility(s)

    def P(self, s):
        return self.proliferation(s)

    def m_psi2(self, s):
        return product_m_psi2(self, s)

    def p_psi1(self, s):
        return product_p_psi1(self, s)

    def entropy(self, s):
        return entropy(self.mobility, s)


@dataclass
class RegularizedPhysics:
    """Non-degenerate, globally C2 approximation agreeing with ``base`` on |s| <= 1 - eps."""

    base: Physics
    eps: float

    singular = False
    degenerate = False

    @property
    def potential(self):
        return self.base.potential

    @property
    def mobility(self):
        return self.base.mobility

    @property
    def proliferation(self):
        return self.base.proliferation

    @property
    def nutrient_mobility(self):
        return self.base.nutrient_mobility

    def _split(self, s):
        s = _arr(s)
        e = self.eps
        return s, s >= 1 - e, s <= -1 + e

    def _extend_const(self, func: Callable, s):
        s, hi, lo = self._split(s)
        x = np.clip(s, -1 + self.eps, 1 - self.eps)
        return func(x)

    def m(self, s):
        return self._extend_const(self.base.m, s)

    def P(self, s):
        return self._extend_const(self.base.P, s)

    def n(self, s):
        return self.base.n(s)

    def psi1(self, s):
        s, hi, lo = self._split(s)
        e = self.eps
        pot = self.base.potential
        v = np.empty_like(s)
        d1 = np.empty_like(s)
        d2 = np.empty_like(s)
        mid = ~(hi | lo)
        v[mid], d1[mid], d2[mid] = pot.psi1(s[mid])
        for mask, j in ((hi, 1 - e), (lo, -1 + e)):
            if np.any(mask):
                p0, p1, p2 = (float(x) for x in pot.psi1(j))
                u = s[mask] - j
                au = np.abs(u)
                v[mask] = p0 + p1 * u + 0.5 * p2 * u**2 + au**3 / 6
                d1[mask] = p1 + p2 * u + 0.5 * u * au
                d2[mask] = p2 + au
        return v, d1, d2

    def psi2(self, s):
        s, hi, lo = self._split(s)
        e = self.eps
        pot = self.base.potential
        v = np.empty_like(s)
        d1 = np.empty_like(s)
        d2 = np.empty_like(s)
        mid = ~(hi | lo)
        v[mid], d1[mid], d2[mid] = pot.psi2(s[mid])
        for mask, j in ((hi, 1 - e), (lo, -1 + e)):
            if np.any(mask):
                p0, p1, p2 = (float(x) for x in pot.psi2(j))
                u = s[mask] - j
                v[mask] = p0 + p1 * u + 0.5 * p2 * u**2
                d1[mask] = p1 + p2 * u
                d2[mask] = np.full_like(u, p2)
        return v, d1, d2

    def triple(self, s):
        v1, a1, b1 = self.psi1(s)
        v2, a2, b2 = self.psi2(s)
        return v1 + v2, a1 + a2, b1 + b2

    potential_triple = triple

    def psi(self, s):
        return self.triple(s)[0]

    def dpsi(self, s):
        return self.triple(s)[1]

    def d2psi(self, s):
        return self.triple(s)[2]

    def m_psi2(self, s):
        return self.m(s) * self.d2psi(s)

    def p_psi1(self, s):
        return self.P(s) * self.dpsi(s)

    def entropy(self, s):
        return entropy_eps(self, s)


def regularize(phys: Physics, eps: float, eps0: float = 0.1) -> RegularizedPhysics:
    if not (0 < eps <= eps0):
        raise ValueError(f"eps must lie in (0, {eps0}], got {eps}")
    return RegularizedPhysics(phys, float(eps))


def entropy_eps(reg: RegularizedPhysics, s):
    """``(M_eps, M_eps', M_eps'')``: second-order Taylor extension of M beyond +-(1 - eps)."""
    s, hi, lo = reg._split(s)
    e = reg.eps
    mob = reg.base.mobility
    M = np.empty_like(s)
    d1 = np.empty_like(s)
    d2 = np.empty_like(s)
    mid = ~(hi | lo)
    if np.any(mid):
        M[mid], d1[mid], d2[mid] = entropy(mob, s[mid])
    for mask, j in ((hi, 1 - e), (lo, -1 + e)):
        if np.any(mask):
            q0, q1, q2 = (float(x) for x in entropy(mob, np.array(j)))
            u = s[mask] - j
            M[mask] = q0 + q1 * u + 0.5 * q2 * u**2
            d1[mask] = q1 + q2 * u
            d2[mask] = q2
    return M, d1, d2
