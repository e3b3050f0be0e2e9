"""Numerical checkers for the structural hypotheses on (Psi, m, n, P, J).

Each hypothesis gets a verdict ``pass``/``fail``/``undetermined`` plus the
witness constants estimated by dense sampling.  Hypotheses quantified over
the whole real line are decided on a bounded window together with a tail
argument that is only available for the built-in families; custom callables
on R come back ``undetermined``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import physics as ph
from .kernel import KernelTable, kernel_bounds, kernel_mass

N_SAMPLES = 10_000
WINDOW = 3.0

PASS, FAIL, UNDETERMINED = "pass", "fail", "undetermined"


@dataclass
class AssumptionResult:
    name: str
    verdict: str
    witnesses: dict = field(default_factory=dict)
    note: str = ""

    def line(self) -> str:
        wit = " ".join(f"{k}={_fmt(v)}" for k, v in self.witnesses.items())
        return f"({self.name}) {self.verdict}" + (f" {wit}" if wit else "") + (f" # {self.note}" if self.note else "")


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.10g}"
    return str(v)


@dataclass
class AssumptionReport:
    results: list[AssumptionResult] = field(default_factory=list)

    def add(self, name, verdict, note="", **witnesses) -> AssumptionResult:
        r = AssumptionResult(name, verdict, witnesses, note)
        self.results.append(r)
        return r

    def __getitem__(self, name: str) -> AssumptionResult:
        for r in self.results:
            if r.name == name:
                return r
        raise KeyError(name)

    def __contains__(self, name: str) -> bool:
        return any(r.name == name for r in self.results)

    def verdict(self, name: str) -> str:
        return self[name].verdict

    def failures(self, names=None) -> list[AssumptionResult]:
        return [r for r in self.results if r.verdict == FAIL and (names is None or r.name in names)]

    def all_pass(self, names) -> bool:
        return all(self[n].verdict == PASS for n in names if n in self)

    def lines(self) -> list[str]:
        return [r.line() for r in self.results]


def _window(n=N_SAMPLES, w=WINDOW) -> np.ndarray:
    s = np.linspace(-w, w, n)
    return np.union1d(s, [0.0])


def _interior(n=N_SAMPLES, pad=0.0) -> np.ndarray:
    # Chebyshev-like clustering so the ends are resolved
    t = np.linspace(0, np.pi, n)
    s = -np.cos(t) * (1 - pad)
    return np.union1d(s, [0.0])


def _end_strips(eps0: float, n=N_SAMPLES // 2, closest=1e-9) -> np.ndarray:
    d = np.geomspace(closest, eps0, n)
    return np.concatenate([-1 + d, 1 - d])


def _is_builtin_on_R(phys) -> bool:
    if isinstance(phys, ph.RegularizedPhysics):
        return True
    return isinstance(phys.potential, ph.PolynomialPotential)


def _poly_min(poly) -> float:
    """Exact global minimum of a polynomial bounded below (even degree, positive lead)."""
    if poly.degree() <= 0:
        return float(poly.coef[0]) if len(poly.coef) else 0.0
    crit = poly.deriv().roots()
    crit = crit[np.abs(crit.imag) < 1e-9].real
    return float(np.min(poly(crit))) if crit.size else -np.inf


def _psi2_inf(phys) -> tuple[float, bool]:
    """Infimum of Psi'' over the real line for the physics integrated in mu-form."""
    if isinstance(phys, ph.RegularizedPhysics):
        e = phys.eps
        s = np.union1d(_interior(pad=0.0) * (1 - e), [-(1 - e), 1 - e])
        return float(np.min(phys.d2psi(s))), True
    pot = phys.potential
    if isinstance(pot, ph.PolynomialPotential):
        d2 = pot.d2
        deg = d2.degree()
        if deg == 0:
            return float(d2.coef[0]), True
        if deg % 2 == 1 or d2.coef[-1] < 0:
            return -np.inf, True
        return _poly_min(d2), True
    return float(np.min(phys.d2psi(_window()))), False


def check_assumptions(
    physics: ph.Physics,
    kernel: KernelTable,
    A: float,
    B: float,
    chi: float,
    formulation: str = "nondegenerate",
    eps: float | None = None,
    eps0: float = 0.1,
    phi0: np.ndarray | None = None,
    sigma0: np.ndarray | None = None,
) -> AssumptionReport:
    """Verdicts for the A-, B-, C- and D-hypotheses relevant to ``formulation``.

    For the mu-form (``nondegenerate``) the A/B sets are checked on the physics
    actually integrated: ``regularize(physics, eps)`` when ``eps`` is given,
    the base physics otherwise.  For the ``degenerate`` formulation the C/D sets
    are checked on the base physics and the A set on its regularisation at
    ``eps`` (or ``eps0``), which is the approximating problem behind it.
    """
    rep = AssumptionReport()
    bounds = kernel_bounds(kernel)
    a = kernel_mass(kernel)
    chi2 = chi**2

    s_flip = kernel.samples[tuple(slice(None, None, -1) for _ in range(kernel.samples.ndim))]
    sym = bool(np.array_equal(kernel.samples, s_flip))
    a3_ok = sym and np.min(a) >= 0 and np.isfinite(bounds.a_star) and (kernel.kind == "delta" or np.isfinite(bounds.b))
    rep.add("A3", PASS if a3_ok else FAIL, a_star=bounds.a_star, a_lower=bounds.a_lower, b=bounds.b, symmetric=sym)

    if formulation == "degenerate":
        modelled = ph.regularize(physics, eps if eps is not None else eps0, eps0=max(eps0, eps or 0))
    elif eps is not None:
        modelled = ph.regularize(physics, eps, eps0=max(eps0, eps))
    else:
        modelled = physics

    _check_A(rep, modelled, bounds, A, B, chi2, phi0)
    _check_B(rep, modelled)
    if physics.singular or physics.degenerate or formulation == "degenerate":
        _check_C(rep, physics, bounds, A, B, chi2, eps0, phi0)
        _check_D(rep, physics, bounds, chi, eps0)
    return rep


def _check_A(rep, phys, bounds, A, B, chi2, phi0):
    s = _window()
    determined = _is_builtin_on_R(phys)
    regularized = isinstance(phys, ph.RegularizedPhysics)

    for name, func in (("A1", phys.m), ("A2", phys.n)):
        vals = func(s)
        lo, hi = float(np.min(vals)), float(np.max(vals))
        const_tail = regularized or isinstance(
            phys.mobility if name == "A1" else phys.nutrient_mobility, (ph.ConstantMobility, ph.DegenerateMobility)
        )
        if lo <= 0:
            rep.add(name, FAIL, lower=lo, upper=hi, note="mobility not bounded away from zero")
        else:
            rep.add(name, PASS if const_tail else UNDETERMINED, lower=lo, upper=hi)

    if phys.singular:
        rep.add("A4", FAIL, note="singular potential is not C2 on R; regularise (eps) or use the degenerate formulation")
        rep.add("A5", FAIL, note="singular potential")
        rep.add("A6", FAIL, note="singular potential")
    else:
        inf2, det = _psi2_inf(phys)
        c0 = A * inf2 + B * bounds.a_lower
        verdict = PASS if c0 > chi2 else FAIL
        if verdict == PASS and not det:
            verdict = UNDETERMINED
        rep.add("A4", verdict, c0=c0, chi2=chi2, note="" if verdict == PASS else "need c0 > chi^2")
        _check_A5(rep, phys, bounds, A, B, chi2)
        _check_A6(rep, phys)

    _check_A7(rep, phys)

    if phi0 is not None:
        ok = True
        try:
            ok = bool(np.all(np.isfinite(phys.psi(phi0))))
        except ph.PotentialDomainError:
            ok = False
        rep.add("A8", PASS if ok else FAIL)


def _check_A5(rep, phys, bounds, A, B, chi2):
    c2_req = (B * (bounds.a_star - bounds.a_lower) + chi2) / (2 * A)
    c2 = c2_req * 1.01 + 1e-9
    s = _window()
    c1 = float(np.max(c2 * s**2 - phys.psi(s)))
    if isinstance(phys, ph.RegularizedPhysics):
        verdict, note = PASS, "cubic growth beyond the window"
    elif isinstance(phys.potential, ph.PolynomialPotential):
        p = phys.potential
        if p.degree > 2 and p.degree % 2 == 0 and p.leading > 0:
            verdict, note = PASS, "super-quadratic growth beyond the window"
        elif p.degree == 2 and p.leading > c2_req:
            c2 = 0.5 * (p.leading + c2_req)
            c1 = float(np.max(c2 * s**2 - phys.psi(s)))
            verdict, note = PASS, "quadratic coefficient exceeds the threshold"
        else:
            verdict, note = FAIL, "insufficient growth"
    else:
        verdict, note = UNDETERMINED, "custom potential on R"
    rep.add("A5", verdict, c2=c2, c1=c1, c2_required=c2_req, note=note)


def _check_A6(rep, phys):
    s = _window()
    if isinstance(phys, ph.RegularizedPhysics):
        z, lim = 1.5, 6.0 / 2**1.5
    elif isinstance(phys.potential, ph.PolynomialPotential) and phys.potential.degree >= 2:
        p, c = phys.potential.degree, phys.potential.leading
        z = p / (p - 1)
        lim = (p * abs(c)) ** z / c if c > 0 else np.inf
    else:
        rep.add("A6", UNDETERMINED, note="no growth model for this potential")
        return
    if not np.isfinite(lim):
        rep.add("A6", FAIL, z=z, note="potential unbounded below")
        return
    psi, d1 = phys.psi(s), phys.dpsi(s)
    c3 = 1.5 * lim
    c4 = float(max(0.0, np.max(np.abs(d1) ** z - c3 * psi)))
    rep.add("A6", PASS, z=z, c3=c3, c4=c4)


def _check_A7(rep, phys):
    P = phys.proliferation
    s = _window()
    vals = phys.P(s)
    if np.min(vals) < 0:
        rep.add("A7", FAIL, note="P takes negative values")
        return
    if isinstance(phys, ph.RegularizedPhysics) or isinstance(P, ph.ZeroProliferation):
        q, c5 = 1.0, float(max(np.max(vals), 1e-300))
    elif isinstance(P, ph.OneSidedProliferation):
        q, c5 = 1.0, max(P.P0, 1e-300)
    elif isinstance(P, ph.TwoSidedProliferation):
        q, c5 = 4.0, max(P.P0, 1e-300) * 2
    else:
        rep.add("A7", UNDETERMINED, note="custom proliferation on R")
        return
    ok = q < 10 / 3 and bool(np.all(vals <= c5 * (1 + np.abs(s) ** q) + 1e-12))
    rep.add("A7", PASS if ok else FAIL, q=q, c5=c5, equality_regime=q <= 4 / 3,
            note="" if ok else "growth exponent outside [1, 10/3)")


def _check_B(rep, phys):
    s = _window()
    unit = bool(np.all(phys.m(s) == 1.0) and np.all(phys.n(s) == 1.0))
    rep.add("B1", PASS if unit else FAIL, note="" if unit else "requires m = n = 1")

    P = phys.proliferation
    s = _window()
    if isinstance(P, ph.ZeroProliferation):
        rep.add("B2", PASS, lipschitz=0.0, bound=0.0)
    elif isinstance(phys, ph.RegularizedPhysics):
        vals = phys.P(s)
        lip = float(np.max(np.abs(np.diff(vals) / np.diff(s))))
        rep.add("B2", PASS, lipschitz=lip, bound=float(np.max(vals)))
    else:
        rep.add("B2", FAIL, note="P unbounded on R")

    if phys.singular:
        rep.add("B3", FAIL, note="singular potential")
        return
    if isinstance(phys, ph.RegularizedPhysics):
        r = 1.0
    elif isinstance(phys.potential, ph.PolynomialPotential):
        r = float(max(phys.potential.degree - 2, 0))
    else:
        rep.add("B3", UNDETERMINED)
        return
    c6 = float(np.max(np.abs(phys.d2psi(s)) / (1 + np.abs(s) ** r)))
    ok = r <= 4 / 3
    rep.add("B3", PASS if ok else FAIL, r=r, c6=c6, mu_criterion=r <= 2 / 3,
            note="" if ok else "Psi' Lipschitz growth exponent exceeds 4/3")


def _check_C(rep, phys, bounds, A, B, chi2, eps0, phi0):
    pot, mob, P = phys.potential, phys.mobility, phys.proliferation
    rep.add("C1", PASS if pot.singular else FAIL,
            note="" if pot.singular else "degenerate formulation needs a singular potential")

    if pot.singular:
        strip = np.geomspace(1e-9, eps0, N_SAMPLES // 2)[::-1]
        hi = pot.psi1(1 - strip)[2]
        lo = pot.psi1(-1 + strip)[2]
        mono = bool(np.all(np.diff(hi) >= 0) and np.all(np.diff(lo) >= 0))
        rep.add("C2", PASS if mono else FAIL, eps0=eps0)

        s = _interior(pad=1e-9)
        c0 = float(np.min(A * pot(s)[2])) + B * bounds.a_lower
        rep.add("C3", PASS if c0 > chi2 else FAIL, c0=c0, chi2=chi2,
                note="" if c0 > chi2 else "need c0 > chi^2")
    else:
        rep.add("C2", FAIL, note="no singular part")
        s = _interior()
        c0 = float(np.min(A * pot(s)[2])) + B * bounds.a_lower
        rep.add("C3", PASS if c0 > chi2 else FAIL, c0=c0, chi2=chi2)

    # C4
    ends = mob(np.array([-1.0, 1.0]))
    inner = mob(_interior(pad=1e-9))
    positive = bool(np.all(inner > 0))
    vanish = bool(np.all(ends == 0))
    prod = phys.m_psi2(np.concatenate([[-1.0, 1.0], _interior()]))
    cont = bool(np.all(np.isfinite(prod)))
    strip = np.geomspace(1e-9, eps0, N_SAMPLES // 2)[::-1]
    mono = bool(np.all(np.diff(mob(1 - strip)) <= 0) and np.all(np.diff(mob(-1 + strip)) <= 0))
    ok = positive and vanish and cont and mono
    rep.add("C4", PASS if ok else FAIL, m_psi2_max=float(np.max(np.abs(prod))),
            note="" if ok else "need m >= 0, m = 0 iff s = +-1, m Psi'' continuous, monotone ends")

    # C5
    pvals = P(_interior())
    nonneg = bool(np.min(pvals) >= 0)
    ends_s = _end_strips(eps0)
    ratio = np.sqrt(P(ends_s)) / np.maximum(mob(ends_s), 1e-300)
    near = np.array([-1 + 1e-9, 1 - 1e-9])
    far = np.array([-1 + 1e-5, 1 - 1e-5])
    r_near = np.sqrt(P(near)) / np.maximum(mob(near), 1e-300)
    r_far = np.sqrt(P(far)) / np.maximum(mob(far), 1e-300)
    bounded = bool(np.all(r_near <= 10 * r_far + 1e-12))
    pp = phys.p_psi1(np.array([1 - 10.0**-k for k in range(4, 12)] + [1.0]))
    pm = phys.p_psi1(np.array([-1 + 10.0**-k for k in range(4, 12)] + [-1.0]))
    pcont = bool(np.all(np.isfinite(pp)) and np.all(np.isfinite(pm))
                 and abs(pp[-1] - pp[-2]) < 1e-6 and abs(pm[-1] - pm[-2]) < 1e-6)
    c7 = float(np.max(ratio)) if bounded else np.inf
    ok = nonneg and bounded and pcont
    side = "s=1" if r_near[1] > 10 * r_far[1] + 1e-12 else "s=-1"
    note = "" if ok else (f"sqrt(P) exceeds c7*m near {side}" if not bounded else "P Psi' has no continuous extension")
    rep.add("C5", PASS if ok else FAIL, c7=c7, note=note)

    if phi0 is not None:
        phi0 = np.asarray(phi0)
        inside = bool(np.max(np.abs(phi0)) <= 1)
        finite = False
        if inside:
            M = phys.entropy(np.clip(phi0, -1 + ph.CLAMP, 1 - ph.CLAMP))[0]
            finite = bool(np.all(np.isfinite(M)))
        rep.add("C6", PASS if inside and finite else FAIL, phi0_max_abs=float(np.max(np.abs(phi0))))


def _check_D(rep, phys, bounds, chi, eps0):
    mob, pot = phys.mobility, phys.potential
    n_one = isinstance(phys.nutrient_mobility, ph.ConstantMobility) and phys.nutrient_mobility.m0 == 1.0
    s = np.linspace(-1, 1, N_SAMPLES + 1)
    lip_m = float(np.max(np.abs(np.diff(mob(s)) / np.diff(s))))
    ok = n_one and chi == 0 and np.isfinite(lip_m)
    notes = []
    if not n_one:
        notes.append("n != 1")
    if chi != 0:
        notes.append("chi != 0")
    rep.add("D1", PASS if ok else FAIL, m_lipschitz=lip_m, note=", ".join(notes))

    if pot.singular:
        si = _interior(pad=1e-9)
        c8 = float(np.min(ph.product_m_psi1_2(phys, np.concatenate([[-1.0, 1.0], si]))))
        d1 = pot.psi1(si)[2]
        d2 = pot.psi2(si)[2]
        need = -(d2 + bounds.a_lower) / d1
        rho = float(max(0.0, np.max(need)))
        ok = c8 > 0 and rho < 1
        rep.add("D2", PASS if ok else FAIL, c8=c8, rho=rho,
                note="" if ok else "need m Psi_1'' >= c8 > 0 and rho < 1")
    else:
        rep.add("D2", FAIL, note="no singular part")

    d = np.geomspace(1e-10, 1.0, N_SAMPLES // 2)
    sg = np.union1d(np.concatenate([-1 + d, 1 - d]), [-1.0, 1.0])
    lips = {}
    for label, f in (("P", phys.P), ("P_psi1", phys.p_psi1)):
        vals = f(sg)
        slopes = np.abs(np.diff(vals) / np.diff(sg))
        lips[label] = float(np.max(slopes))
        near = float(max(np.max(slopes[:50]), np.max(slopes[-50:])))
        mid = float(np.max(slopes[len(slopes) // 4: 3 * len(slopes) // 4]))
        lips[label + "_ok"] = np.isfinite(lips[label]) and near <= 10 * (mid + 1.0)
    ok = lips["P_ok"] and lips["P_psi1_ok"]
    rep.add("D3", PASS if ok else FAIL, P_lipschitz=lips["P"], P_psi1_lipschitz=lips["P_psi1"])


def entropy_growth_witness(reg: ph.RegularizedPhysics, n: int = N_SAMPLES, window: float = WINDOW) -> dict:
    """Sampled constants in ``|sqrt(P_eps) M_eps'(s)| <= c7 |s| + C``.

    ``c7`` is the largest outer slope ``sqrt(P(j)) / m(j)`` at the junctions
    ``j = +-(1 - eps)`` and ``C`` the smallest offset making the bound hold on
    ``n`` samples of ``[-window, window]``.
    """
    s = np.linspace(-window, window, n)
    g = np.abs(ph.product_sqrtp_mprime(reg, s))
    ends = np.array([-1 + reg.eps, 1 - reg.eps])
    c7 = float(np.max(np.sqrt(reg.base.P(ends)) / reg.base.m(ends)))
    C = float(max(0.0, np.max(g - c7 * np.abs(s))))
    tail = window * (1 + 1e-9)
    far = np.abs(ph.product_sqrtp_mprime(reg, np.array([-tail, tail])))
    return {"c7": c7, "C": C, "holds": bool(np.all(far <= c7 * tail + C + 1e-9)), "samples": int(n)}
