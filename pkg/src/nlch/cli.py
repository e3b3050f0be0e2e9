"""Configuration parsing, run orchestration and file output for the ``nlch`` command."""

from __future__ import annotations

import argparse
import configparser
import hashlib
import os
import struct
import sys
from dataclasses import dataclass, field, replace

import numpy as np

from .assumptions import check_assumptions
from .experiments import (AssumptionFailure, ExperimentReport, run_backend_comparison,
                          run_continuous_dependence, run_epsilon_ladder)
from .grid import build_grid, integrate as integral
from .kernel import build_kernel
from .model import ModelParams, State
from .monitors import MonitorSeries, write_csv
from .physics import (ConstantMobility, DegenerateMobility, LogarithmicPotential, OneSidedProliferation,
                      Physics, PolynomialPotential, TwoSidedProliferation, ZeroProliferation, regularize)
from .timestepper import StepperConfig, integrate

MAGIC = b"NLCH1"

# section -> key -> (type, default); None default means "unset"
SCHEMA = {
    "grid": {"lengths": ("floats", "1.0"), "cells": ("ints", "64")},
    "kernel": {"kind": ("str", "gaussian"), "width": ("float", "0.05"), "amplitude": ("float", "4.0"),
               "normalize": ("bool", "true"), "weight": ("float", "1.0")},
    "physics": {"potential": ("str", "quartic"), "theta": ("float", "1.0"), "theta_c": ("float", "1.5"),
                "coeffs": ("floats", "0.25 0 -0.5 0 0.25"), "mobility": ("str", "constant"), "m0": ("float", "1.0"),
                "n0": ("float", "1.0"), "proliferation": ("str", "zero"), "P0": ("float", "1.0"),
                "A": ("float", "1.0"), "B": ("float", "1.0"), "chi": ("float", "0.0"),
                "eps": ("float?", ""), "eps0": ("float", "0.1")},
    "model": {"formulation": ("str", "nondegenerate"), "upwind": ("bool", "false"),
              "confinement_tol": ("float", "1e-6")},
    "stepper": {"scheme": ("str", "explicit-euler"), "dt": ("float", "1.0"), "safety": ("float", "0.9"),
                "t_end": ("float", "0.1"), "adapt": ("bool", "true"), "max_steps": ("int", "1000000")},
    "monitor": {"cadence": ("int", "1"), "dual_norms": ("bool", "false")},
    "initial": {"phi": ("str", "cosine"), "phi_mean": ("float", "0.0"), "phi_amplitude": ("float", "0.1"),
                "phi_mode": ("int", "1"), "phi_width": ("float", "0.08"), "phi_center": ("float", "0.5"),
                "phi_band": ("int", "8"), "sigma": ("str", "constant"), "sigma_mean": ("float", "0.5"),
                "sigma_amplitude": ("float", "0.0"), "sigma_mode": ("int", "1")},
    "experiment": {"kind": ("str", "none"), "eps_list": ("floats", "0.1 0.05 0.025 0.0125"),
                   "delta": ("float", "0.01"), "assumption_set": ("str", "auto"), "levels": ("ints", "32 64 128"),
                   "mode_fraction": ("float", "0.5"), "tolerance": ("float", "1e-3"), "analytic": ("str", "none")},
    "output": {"directory": ("str", "nlch-out"), "snapshot_every": ("int", "0")},
    "run": {"seed": ("int", "0")},
}

CHOICES = {
    ("kernel", "kind"): ("gaussian", "compact", "delta"),
    ("physics", "potential"): ("quartic", "polynomial", "logarithmic"),
    ("physics", "mobility"): ("constant", "degenerate"),
    ("physics", "proliferation"): ("zero", "one-sided", "two-sided"),
    ("model", "formulation"): ("nondegenerate", "degenerate"),
    ("stepper", "scheme"): ("explicit-euler", "imex-lagged"),
    ("initial", "phi"): ("constant", "cosine", "tanh", "noise"),
    ("initial", "sigma"): ("constant", "cosine"),
    ("experiment", "kind"): ("none", "ladder", "ctsdep", "compare"),
    ("experiment", "assumption_set"): ("auto", "B", "D"),
    ("experiment", "analytic"): ("none", "heat"),
}


class ConfigError(ValueError):
    def __init__(self, violations):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations))


@dataclass
class RunConfig:
    values: dict
    text: str = ""
    digest: str = ""
    assumption_lines: list = field(default_factory=list)

    def __getitem__(self, section: str) -> dict:
        return self.values[section]

    @property
    def seed(self) -> int:
        return self.values["run"]["seed"]


def _convert(kind: str, raw: str):
    raw = raw.strip()
    if kind == "str":
        return raw
    if kind == "float":
        return float(raw)
    if kind == "float?":
        return None if raw in ("", "none") else float(raw)
    if kind == "int":
        return int(raw)
    if kind == "bool":
        low = raw.lower()
        if low in ("true", "yes", "on", "1"):
            return True
        if low in ("false", "no", "off", "0"):
            return False
        raise ValueError(f"not a boolean: {raw!r}")
    if kind == "floats":
        return tuple(float(x) for x in raw.replace(",", " ").split())
    if kind == "ints":
        return tuple(int(x) for x in raw.replace(",", " ").split())
    raise AssertionError(kind)


def _canonical(values: dict) -> str:
    lines = []
    for sec in sorted(values):
        lines.append(f"[{sec}]")
        for key in sorted(values[sec]):
            v = values[sec][key]
            if isinstance(v, tuple):
                v = " ".join(repr(x) for x in v)
            elif isinstance(v, bool):
                v = "true" if v else "false"
            else:
                v = repr(v)
            lines.append(f"{key} = {v}")
    return "\n".join(lines) + "\n"


def parse_config(text: str, check: bool = True) -> RunConfig:
    """Parse and validate; all violations are collected before raising ``ConfigError``."""
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise ConfigError([f"malformed config: {exc}"]) from None

    errors = []
    values = {}
    for sec in cp.sections():
        if sec not in SCHEMA:
            errors.append(f"unknown section [{sec}]")
            continue
        for key in cp[sec]:
            if key not in SCHEMA[sec]:
                errors.append(f"unknown key {sec}.{key}")
    for sec, keys in SCHEMA.items():
        values[sec] = {}
        for key, (kind, default) in keys.items():
            raw = cp[sec][key] if cp.has_section(sec) and key in cp[sec] else default
            try:
                values[sec][key] = _convert(kind, raw)
            except ValueError as exc:
                errors.append(f"{sec}.{key}: {exc}")
    if errors:
        raise ConfigError(errors)

    for (sec, key), allowed in CHOICES.items():
        if values[sec][key] not in allowed:
            errors.append(f"{sec}.{key} = {values[sec][key]!r} not in {allowed}")
    errors += _structural_checks(values)
    if errors:
        raise ConfigError(errors)

    cfg = RunConfig(values, text, hashlib.sha256(_canonical(values).encode()).hexdigest())
    if check:
        errors, lines = _assumption_checks(cfg)
        cfg.assumption_lines = lines
        if errors:
            raise ConfigError(errors)
    return cfg


def _structural_checks(v: dict) -> list[str]:
    err = []
    g, ph, md, st, ini, ex = v["grid"], v["physics"], v["model"], v["stepper"], v["initial"], v["experiment"]
    if len(g["lengths"]) != len(g["cells"]):
        err.append("grid.lengths and grid.cells need the same number of entries")
    if len(g["cells"]) not in (1, 2):
        err.append("only 1D and 2D grids are supported")
    if any(L <= 0 for L in g["lengths"]) or any(n < 2 for n in g["cells"]):
        err.append("grid lengths must be positive and cells at least 2")
    if ph["A"] <= 0 or ph["B"] <= 0:
        err.append("physics.A and physics.B must be positive")
    if ph["chi"] < 0:
        err.append("physics.chi must be nonnegative")
    if ph["eps"] is not None and not 0 < ph["eps"] <= ph["eps0"]:
        err.append(f"physics.eps must lie in (0, eps0 = {ph['eps0']}]")
    if ph["m0"] <= 0 or ph["n0"] <= 0:
        err.append("mobility prefactors must be positive")
    if ph["P0"] < 0:
        err.append("physics.P0 must be nonnegative")
    if st["dt"] <= 0 or not 0 < st["safety"] <= 1 or st["t_end"] < 0 or st["max_steps"] < 1:
        err.append("stepper needs dt > 0, safety in (0, 1], t_end >= 0, max_steps >= 1")
    if v["monitor"]["cadence"] < 1:
        err.append("monitor.cadence must be positive")
    if v["kernel"]["kind"] != "delta" and v["kernel"]["width"] <= 0:
        err.append("kernel.width must be positive")

    singular = ph["potential"] == "logarithmic"
    if md["formulation"] == "degenerate":
        if ph["mobility"] != "degenerate":
            err.append("degenerate formulation needs physics.mobility = degenerate")
        if not singular:
            err.append("degenerate formulation needs a singular potential (physics.potential = logarithmic)")
    if singular and ph["theta"] <= 0:
        err.append("physics.theta must be positive")
    if ph["mobility"] == "degenerate" and md["formulation"] == "nondegenerate" and ph["eps"] is None:
        err.append("a degenerate mobility in the nondegenerate formulation needs physics.eps")
    bound = abs(ini["phi_mean"]) + abs(ini["phi_amplitude"]) if ini["phi"] != "constant" else abs(ini["phi_mean"])
    if singular and ph["eps"] is None and bound >= 1:
        err.append("a singular potential needs |phi0| < 1 (|phi_mean| + |phi_amplitude| < 1)")

    kind = ex["kind"]
    if kind == "ladder":
        eps = ex["eps_list"]
        if len(eps) < 2 or any(b >= a for a, b in zip(eps, eps[1:])):
            err.append("experiment.eps_list must be strictly decreasing with at least two entries")
        if any(not 0 < e <= ph["eps0"] for e in eps):
            err.append(f"experiment.eps_list entries must lie in (0, eps0 = {ph['eps0']}]")
        if ph["mobility"] != "degenerate" or not singular:
            err.append("ladder needs a degenerate mobility and a logarithmic potential")
    if kind == "ctsdep" and ex["delta"] < 0:
        err.append("experiment.delta must be nonnegative")
    if kind == "compare":
        if md["formulation"] != "nondegenerate" or ph["mobility"] == "degenerate" and ph["eps"] is None:
            err.append("compare needs non-degenerate physics")
        if len(ex["levels"]) < 2 or list(ex["levels"]) != sorted(ex["levels"]):
            err.append("experiment.levels must be increasing with at least two entries")
        if not 0 < ex["mode_fraction"] <= 1:
            err.append("experiment.mode_fraction must lie in (0, 1]")
    if ex["analytic"] == "heat":
        if v["kernel"]["kind"] != "delta" or ph["potential"] != "polynomial" or len(ph["coeffs"]) > 3:
            err.append("analytic = heat needs a delta kernel and a quadratic polynomial potential")
        if ph["proliferation"] != "zero" or ph["chi"] != 0 or ph["mobility"] != "constant":
            err.append("analytic = heat needs P = 0, chi = 0 and a constant mobility")
        if ini["phi"] != "cosine":
            err.append("analytic = heat needs initial.phi = cosine")
    return err


# ---------------------------------------------------------------------------
# object construction


def build_physics(v: dict) -> Physics:
    ph = v["physics"]
    if ph["potential"] == "quartic":
        pot = PolynomialPotential.quartic()
    elif ph["potential"] == "polynomial":
        pot = PolynomialPotential(ph["coeffs"])
    else:
        pot = LogarithmicPotential(ph["theta"], ph["theta_c"])
    mob = DegenerateMobility(ph["m0"]) if ph["mobility"] == "degenerate" else ConstantMobility(ph["m0"])
    prolif = {"zero": ZeroProliferation, "one-sided": OneSidedProliferation, "two-sided": TwoSidedProliferation}
    P = prolif[ph["proliferation"]]() if ph["proliferation"] == "zero" else prolif[ph["proliferation"]](ph["P0"])
    return Physics(pot, mob, ConstantMobility(ph["n0"]), P)


def build_params(cfg: RunConfig, cells=None) -> ModelParams:
    v = cfg.values
    grid = build_grid(v["grid"]["lengths"], cells or v["grid"]["cells"])
    kv = v["kernel"]
    if kv["kind"] == "delta":
        kernel = build_kernel("delta", {"weight": kv["weight"]}, grid)
    else:
        amp = kv["amplitude"]
        if kv["normalize"]:
            # unit mass of the free-space kernel times the amplitude
            w = kv["width"]
            mass = (np.sqrt(2 * np.pi) * w) ** grid.dims if kv["kind"] == "gaussian" else _compact_mass(w, grid.dims)
            amp = amp / mass
        kernel = build_kernel(kv["kind"], {"width": kv["width"], "amplitude": amp}, grid)
    base = build_physics(v)
    ph = v["physics"]
    physics = regularize(base, ph["eps"], ph["eps0"]) if ph["eps"] is not None else base
    return ModelParams(grid, kernel, physics, ph["A"], ph["B"], ph["chi"], v["model"]["formulation"],
                       v["model"]["upwind"], v["model"]["confinement_tol"])


def _compact_mass(w: float, dims: int) -> float:
    # int (1 - r^2/w^2)^2: 16 w / 15 in 1D, pi w^2 / 3 in 2D
    return 16 * w / 15 if dims == 1 else np.pi * w**2 / 3


def build_initial(cfg: RunConfig, grid) -> State:
    ini = cfg.values["initial"]
    mesh = grid.mesh()
    L = grid.lengths
    x = mesh[0] / L[0]
    kind = ini["phi"]
    if kind == "constant":
        phi = np.full(grid.cells, ini["phi_mean"])
    elif kind == "cosine":
        phi = ini["phi_mean"] + ini["phi_amplitude"] * np.cos(ini["phi_mode"] * np.pi * x)
    elif kind == "tanh":
        phi = ini["phi_mean"] + ini["phi_amplitude"] * np.tanh((x - ini["phi_center"]) / ini["phi_width"])
    else:
        rng = np.random.default_rng(cfg.seed)
        f = np.zeros(grid.cells)
        band = ini["phi_band"]
        for ks in np.ndindex(*([band + 1] * grid.dims)):
            if sum(ks) == 0:
                continue
            mode = np.ones(grid.cells)
            for d, k in enumerate(ks):
                mode = mode * np.cos(k * np.pi * mesh[d] / L[d])
            f += rng.standard_normal() * mode / (1.0 + sum(ks))
        phi = ini["phi_mean"] + ini["phi_amplitude"] * f / np.max(np.abs(f))
    if ini["sigma"] == "constant":
        sigma = np.full(grid.cells, ini["sigma_mean"])
    else:
        sigma = ini["sigma_mean"] + ini["sigma_amplitude"] * np.cos(ini["sigma_mode"] * np.pi * x)
    return State(0.0, phi, sigma)


def build_stepper(cfg: RunConfig) -> StepperConfig:
    s = cfg.values["stepper"]
    return StepperConfig(s["scheme"], s["dt"], s["safety"], s["t_end"], s["adapt"], s["max_steps"])


def _sets_for(cfg: RunConfig) -> tuple[str, ...]:
    v = cfg.values
    degenerate = v["model"]["formulation"] == "degenerate"
    names = ("A3", "C1", "C2", "C3", "C4", "C5", "C6") if degenerate else ("A1", "A2", "A3", "A4")
    ex = v["experiment"]
    if ex["kind"] == "ctsdep":
        which = ex["assumption_set"]
        if which == "auto":
            which = "D" if degenerate else "B"
        names += ("B1", "B2", "B3") if which == "B" else ("D1", "D2", "D3")
    return names


def _assumption_checks(cfg: RunConfig):
    params = build_params(cfg)
    v = cfg.values
    base = params.physics.base if hasattr(params.physics, "base") else params.physics
    grid = params.grid
    init = build_initial(cfg, grid)
    rep = check_assumptions(base, params.kernel, params.A, params.B, params.chi,
                            formulation=params.formulation, eps=v["physics"]["eps"], eps0=v["physics"]["eps0"],
                            phi0=init.phi, sigma0=init.sigma)
    lines = rep.lines()
    errors = []
    for r in rep.results:
        if r.name in _sets_for(cfg) and r.verdict == "fail":
            detail = " ".join(f"{k}={_short(val)}" for k, val in r.witnesses.items())
            msg = f"({r.name}) fails: {r.note or detail}"
            if r.note and detail:
                msg += f" [{detail}]"
            errors.append(msg)
    return errors, lines


def _short(x) -> str:
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, float):
        return f"{x:.10g}"
    return str(x)


# ---------------------------------------------------------------------------
# snapshots


def write_snapshot(path, grid, t: float, fields) -> None:
    fields = [np.ascontiguousarray(f, dtype="<f8") for f in fields]
    for f in fields:
        grid.check(f)
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<I", grid.dims))
        fh.write(struct.pack(f"<{grid.dims}Q", *grid.cells))
        fh.write(struct.pack(f"<{grid.dims}d", *grid.spacing))
        fh.write(struct.pack("<d", t))
        fh.write(struct.pack("<I", len(fields)))
        for f in fields:
            fh.write(f.tobytes(order="C"))


def read_snapshot(path):
    """Return ``(cells, spacing, t, fields)``."""
    with open(path, "rb") as fh:
        data = fh.read()
    if data[:5] != MAGIC:
        raise ValueError("not a snapshot file")
    off = 5
    (dims,) = struct.unpack_from("<I", data, off)
    off += 4
    cells = struct.unpack_from(f"<{dims}Q", data, off)
    off += 8 * dims
    spacing = struct.unpack_from(f"<{dims}d", data, off)
    off += 8 * dims
    (t,) = struct.unpack_from("<d", data, off)
    off += 8
    (nf,) = struct.unpack_from("<I", data, off)
    off += 4
    size = int(np.prod(cells))
    fields = []
    for _ in range(nf):
        fields.append(np.frombuffer(data, dtype="<f8", count=size, offset=off).reshape(cells).copy())
        off += 8 * size
    if off != len(data):
        raise ValueError("trailing bytes in snapshot")
    return tuple(int(c) for c in cells), spacing, t, fields


class _RunObserver:
    """Monitor series plus periodic snapshots."""

    def __init__(self, series: MonitorSeries, directory: str, every: int):
        self.series = series
        self.directory = directory
        self.every = every
        self.count = 0
        self.k = 0

    def _snap(self, state, params):
        fields = [state.phi, state.sigma]
        if params.formulation == "nondegenerate":
            from .model import chemical_potential
            fields.append(chemical_potential(state, params))
        path = os.path.join(self.directory, f"snapshot_{self.count:05d}.bin")
        write_snapshot(path, params.grid, state.t, fields)
        self.count += 1

    def start(self, state, params):
        self.params = params
        self.series.start(state, params)
        self._snap(state, params)
        self.last = state

    def after_step(self, prev, asm, dt, new):
        self.series.after_step(prev, asm, dt, new)
        self.k += 1
        self.last = new
        if self.every and self.k % self.every == 0:
            self._snap(new, self.params)

    def finish(self, state):
        self.series.finish(state)
        if not (self.every and self.k % self.every == 0) and self.k > 0:
            self._snap(state, self.params)


def run_single(cfg: RunConfig, out: str) -> ExperimentReport:
    params = build_params(cfg)
    init = build_initial(cfg, params.grid)
    stepper = build_stepper(cfg)
    os.makedirs(out, exist_ok=True)
    series = MonitorSeries(cfg.values["monitor"]["cadence"])
    obs = _RunObserver(series, out, cfg.values["output"]["snapshot_every"])
    traj = integrate(init, params, stepper, obs, keep_states=False)
    rep = ExperimentReport("run", cfg.digest, config_text=cfg.text)
    rep.monitors["run"] = series.records
    mass = series.column("mass_total")
    scale = max(abs(mass[0]), integral(params.grid, np.abs(init.phi) + np.abs(init.sigma)), 1e-300)
    rep.constants["steps"] = traj.steps
    rep.constants["snapshots"] = obs.count
    rep.constants["mass_drift_rel"] = float(np.max(np.abs(mass - mass[0])) / scale)
    rep.verdicts["mass_conserved"] = rep.constants["mass_drift_rel"] <= 1e-11
    if params.formulation == "degenerate":
        tol = params.confinement_tol
        rep.verdicts["confinement"] = bool(series.column("phi_min").min() >= -1 - tol
                                           and series.column("phi_max").max() <= 1 + tol)
    else:
        E = np.array(series.step_energies)
        inc = np.diff(E)
        rep.constants["max_energy_increase"] = float(inc.max()) if len(inc) else 0.0
    return rep


def run_experiment(cfg: RunConfig, kind: str) -> ExperimentReport:
    v = cfg.values
    ex = v["experiment"]
    params = build_params(cfg)
    stepper = build_stepper(cfg)
    cadence = v["monitor"]["cadence"]
    if kind == "ladder":
        init = build_initial(cfg, params.grid)
        base_params = params.with_physics(build_physics(v), "degenerate")
        rep = run_epsilon_ladder(base_params, init, stepper, ex["eps_list"], v["physics"]["eps0"], cadence, cfg.digest)
    elif kind == "ctsdep":
        init = build_initial(cfg, params.grid)
        which = None if ex["assumption_set"] == "auto" else ex["assumption_set"]
        rep = run_continuous_dependence(params, init, stepper, ex["delta"], assumption_set=which,
                                        cadence=cadence, digest=cfg.digest)
    else:
        base_cells = v["grid"]["cells"]

        def builder(n):
            cells = tuple(max(2, int(round(n * c / base_cells[0]))) for c in base_cells)
            p = build_params(cfg, cells)
            return p, build_initial(cfg, p.grid)

        analytic = heat_solution(cfg) if ex["analytic"] == "heat" else None
        rep = run_backend_comparison(builder, ex["levels"], stepper, ex["mode_fraction"], analytic,
                                     cfg.digest, ex["tolerance"])
    rep.config_text = cfg.text
    return rep


def heat_solution(cfg: RunConfig):
    """Exact decay of a single cosine mode when every nonlocal and source term vanishes."""
    v = cfg.values
    ph, ini = v["physics"], v["initial"]
    coeffs = tuple(ph["coeffs"]) + (0.0,) * 3
    diffusivity = ph["m0"] * ph["A"] * 2 * coeffs[2]
    k = ini["phi_mode"]
    L = v["grid"]["lengths"][0]

    def exact(t, grid):
        x = grid.mesh()[0]
        rate = diffusivity * (k * np.pi / L) ** 2
        return ini["phi_mean"] + ini["phi_amplitude"] * np.cos(k * np.pi * x / L) * np.exp(-rate * t)

    return exact


# ---------------------------------------------------------------------------
# entry point


def _error(code: str, msg: str) -> None:
    print(f"ERROR {code}: {msg}", file=sys.stderr)


def main(argv=None) -> int:
    ap = argparse.ArgumentParser(prog="nlch", description="nonlocal Cahn-Hilliard tumour-growth solver")
    ap.add_argument("command", choices=("run", "ladder", "ctsdep", "compare", "check"))
    ap.add_argument("--config", required=True)
    ap.add_argument("--out", default=None)
    ap.add_argument("--seed", type=int, default=None)
    args = ap.parse_args(argv)

    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as exc:
        _error("io", str(exc))
        return 2
    if args.seed is not None:
        if args.seed < 0 or args.seed >= 2**64:
            _error("config", "seed must be an unsigned 64-bit integer")
            return 2
        text = _override_seed(text, args.seed)
    try:
        cfg = parse_config(text)
    except ConfigError as exc:
        for v in exc.violations:
            _error("config", v)
        return 2

    if args.command == "check":
        print("\n".join(cfg.assumption_lines))
        print(f"digest: {cfg.digest}")
        return 0

    out = args.out or cfg.values["output"]["directory"]
    try:
        if args.command == "run":
            rep = run_single(cfg, out)
        else:
            rep = run_experiment(cfg, args.command)
        rep.write(out)
    except AssumptionFailure as exc:
        _error("assumption", str(exc))
        return 2
    except Exception as exc:  # runtime failures of the numerics are verdict failures
        _error("runtime", f"{type(exc).__name__}: {exc}")
        return 1
    print("\n".join(rep.summary_lines()))
    return 0 if rep.passed else 1


def _override_seed(text: str, seed: int) -> str:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";"))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error:
        return text
    if not cp.has_section("run"):
        cp.add_section("run")
    cp["run"]["seed"] = str(seed)
    import io
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


if __name__ == "__main__":
    sys.exit(main())
