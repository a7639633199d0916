"""Command-line entry point.

Exit codes: 0 pass, 1 configuration error, 2 verification failure,
3 numerical failure.
"""

from __future__ import annotations

import argparse
import copy
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from itertools import combinations
from pathlib import Path

import numpy as np

from . import energy as en
from . import model
from . import reduced as rd
from . import symmetry as sy
from .errors import BoussymError, CatalogMismatchError, IntegrationError, QuadratureError, RegimeError
from .model import GridSpec, PhysicalParams, atomic_write_text
from .solution import (
    InvariantSolutionSpec,
    build_solution,
    candidate_from_trajectory,
    dilation_invariance_check,
    rotation_invariance_check,
)
from .timefuncs import h_function, time_function

EXIT_OK, EXIT_CONFIG, EXIT_FAIL, EXIT_NUMERIC = 0, 1, 2, 3


class ConfigError(ValueError):
    pass


DEFAULT_CONFIG = {
    "f": 1.0,
    "N": 2.0,
    "g": 9.8,
    "branch": "auto",
    "A": None,
    "K": 1.0,
    "phi0": 0.5,
    "dphi0": 0.0,
    "exploratory": False,
    "time_functions": {
        "a": {"kind": "poly", "coefs": [0.3, 1.0, -0.5, 0.2, 0.05]},
        "b": {"kind": "sin", "amplitude": 1.2, "omega": 0.9, "phase": 0.3},
        "c": {"kind": "exp", "amplitude": 0.7, "rate": -0.6},
    },
    "h": "sin_s",
    "grid": {"x0": -1.0, "z0": -1.0, "hx": 0.1, "hz": 0.1, "nx": 9, "nz": 9, "t0": 1.0, "dt": 0.05, "nt": 9},
    "disk_radius": 1.0,
    "t_end": 20.0,
    "time_samples": 64,
    "jet_count": 100,
    "jet_scale": 1.0,
    "residual_points": 1000,
    "invariance_points": 500,
    "bracket_points": 20,
    "transform_eps": 0.3,
    "seed": 20090422,
    "tolerances": {
        "determining": 1e-9,
        "drift": 1e-8,
        "energy": 1e-6,
        "analytic_residual": 1e-10,
        "order": 0.2,
        "invariance": 1e-12,
    },
    "mutate": False,
    "out": "out",
}


@dataclass
class RunConfig:
    params: PhysicalParams
    branch: str
    A: float | None
    K: float | None
    phi0: float
    dphi0: float
    exploratory: bool
    functions: dict
    h_name: str
    grid: GridSpec
    disk_radius: float
    t_end: float
    time_samples: int
    jet_count: int
    jet_scale: float
    residual_points: int
    invariance_points: int
    bracket_points: int
    transform_eps: float
    seed: int
    tolerances: dict
    mutate: bool
    out: Path
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def abc(self):
        return self.functions["a"], self.functions["b"], self.functions["c"]

    @property
    def h(self):
        return h_function(self.h_name)


def _merge(base: dict, override: dict) -> dict:
    out = copy.deepcopy(base)
    for k, v in override.items():
        if k not in out:
            raise ConfigError(f"unknown config key {k!r}")
        if isinstance(out[k], dict) and isinstance(v, dict) and k != "time_functions":
            out[k] = _merge(out[k], v)
        elif k == "time_functions":
            merged = dict(out[k])
            for name, spec in v.items():
                if name not in ("a", "b", "c"):
                    raise ConfigError(f"unknown time function {name!r}")
                merged[name] = spec
            out[k] = merged
        else:
            out[k] = v
    return out


def resolve_config(raw: dict) -> RunConfig:
    try:
        params = PhysicalParams(float(raw["f"]), float(raw["N"]), float(raw["g"]))
        branch = raw["branch"]
        actual = "f-zero" if params.f_zero else "f-nonzero"
        if branch == "auto":
            branch = actual
        elif branch != actual:
            raise ConfigError(f"branch {branch!r} contradicts f={params.f}")
        if (raw["A"] is None) == (raw["K"] is None):
            raise ConfigError("give exactly one of A or K")
        functions = {k: time_function(v) for k, v in raw["time_functions"].items()}
        h_function(raw["h"])
        grid = GridSpec(**{k: (int(v) if k in ("nx", "nz", "nt") else float(v)) for k, v in raw["grid"].items()})
        tol = {k: float(v) for k, v in raw["tolerances"].items()}
        if any(v <= 0 for v in tol.values()):
            raise ConfigError("tolerances must be positive")
        seed = raw["seed"]
        if not isinstance(seed, int) or isinstance(seed, bool) or seed < 0 or seed >= 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        counts = {k: int(raw[k]) for k in ("time_samples", "jet_count", "residual_points", "invariance_points", "bracket_points")}
        if min(counts.values()) < 1:
            raise ConfigError("sample counts must be positive")
        if float(raw["disk_radius"]) <= 0 or float(raw["t_end"]) <= 0 or float(raw["jet_scale"]) < 0:
            raise ConfigError("disk_radius and t_end must be positive, jet_scale non-negative")
        return RunConfig(
            params=params,
            branch=branch,
            A=None if raw["A"] is None else float(raw["A"]),
            K=None if raw["K"] is None else float(raw["K"]),
            phi0=float(raw["phi0"]),
            dphi0=float(raw["dphi0"]),
            exploratory=bool(raw["exploratory"]),
            functions=functions,
            h_name=raw["h"],
            grid=grid,
            disk_radius=float(raw["disk_radius"]),
            t_end=float(raw["t_end"]),
            jet_scale=float(raw["jet_scale"]),
            transform_eps=float(raw["transform_eps"]),
            seed=seed,
            tolerances=tol,
            mutate=bool(raw["mutate"]),
            out=Path(raw["out"]),
            raw=raw,
            **counts,
        )
    except ConfigError:
        raise
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from exc


def load_config(path=None, seed=None, out=None) -> dict:
    raw = copy.deepcopy(DEFAULT_CONFIG)
    if path is not None:
        try:
            user = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(user, dict):
            raise ConfigError("config must be a JSON object")
        raw = _merge(raw, user)
    if seed is not None:
        raw["seed"] = seed
    if out is not None:
        raw["out"] = str(out)
    return raw


def _plain(obj):
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, allow_nan=True, default=_plain) + "\n"


def _write_json(path: Path, obj) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    atomic_write_text(path, _dump(obj))


def _write_csv(path: Path, header: str, rows) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [header]
    for row in rows:
        lines.append(",".join(v if isinstance(v, str) else format(float(v), ".17g") for v in row))
    atomic_write_text(path, "\n".join(lines) + "\n")


def _line(label: str, ok: bool, detail: str = "") -> None:
    print(f"{'PASS' if ok else 'FAIL'}  {label}" + (f"  ({detail})" if detail else ""))


def _params_dict(p: PhysicalParams) -> dict:
    return {"f": p.f, "N": p.N, "g": p.g, "alpha": p.alpha}


# ---------------------------------------------------------------------------
# commands


def cmd_verify_symmetries(cfg: RunConfig) -> int:
    p = cfg.params
    a, b, c = cfg.abc
    if cfg.mutate:
        gens = sy.mutated_catalog(p, a, b, c, cfg.h if p.f_zero else None)
    elif p.f_zero:
        gens = sy.catalog_f0(p, a, b, c, cfg.h) + [sy.x9_prime(p)]
    else:
        gens = sy.catalog(p, a, b, c)
    jets = sy.manifold_jets(p, cfg.seed, cfg.jet_count, cfg.jet_scale)
    defect = max(model.manifold_defect(p, j) for j in jets)
    reports = sy.verify_generators(gens, p, jets, cfg.tolerances["determining"])
    for r in reports:
        _line(f"{r.generator}: {r.description}", r.passed, f"max residual {max(r.max_residual):.3e}")
    passed = all(r.passed for r in reports)
    doc = {
        "command": "verify-symmetries",
        "branch": cfg.branch,
        "parameter_draw": _params_dict(p),
        "time_functions": {k: v.to_dict() for k, v in cfg.functions.items()},
        "h": cfg.h_name if p.f_zero else None,
        "seed": cfg.seed,
        "jet_count": len(jets),
        "max_manifold_defect": defect,
        "mutated": cfg.mutate,
        "threshold": cfg.tolerances["determining"],
        "generators": [r.as_dict() for r in reports],
        "passed": passed,
    }
    _write_json(cfg.out / "verify_symmetries.json", doc)
    return EXIT_OK if passed else EXIT_FAIL


def _constants(cfg: RunConfig) -> rd.ReducedConstants:
    return rd.ReducedConstants.from_initial(cfg.params, cfg.phi0, cfg.dphi0, A=cfg.A, K=cfg.K, exploratory=cfg.exploratory)


def _solution(cfg: RunConfig, t_end=None):
    cfg.params.require_rotating()
    consts = _constants(cfg)
    traj = rd.integrate_phi(consts, cfg.phi0, cfg.dphi0, t_end or cfg.t_end, drift_tol=cfg.tolerances["drift"])
    return build_solution(InvariantSolutionSpec(cfg.params, consts, traj))


def _period_or_none(consts: rd.ReducedConstants):
    if consts.B2 > 0 and consts.K >= 0:
        return rd.period(consts.K, consts.B)[0]
    return None


def cmd_solve(cfg: RunConfig) -> int:
    sol = _solution(cfg)
    traj, consts = sol.spec.trajectory, sol.constants
    stride = max(1, len(traj.t) // 4000)
    _write_csv(cfg.out / "trajectory.csv", "t,phi,dphi,H,R,V", traj.rows(stride))
    sol.sample(cfg.grid).write(cfg.out / "fields")
    bound_ok = consts.K < 0 or traj.max_abs_phi() <= consts.C_star * (1 + 1e-9)
    meta = {
        "command": "solve",
        "params": _params_dict(cfg.params),
        "constants": consts.as_dict(),
        "phi0": cfg.phi0,
        "dphi0": cfg.dphi0,
        "period": _period_or_none(consts),
        "dt": traj.dt,
        "steps": len(traj.t) - 1,
        "drift": traj.drift,
        "max_abs_phi": traj.max_abs_phi(),
        "bound_satisfied": bound_ok,
        "grid": asdict(cfg.grid),
        "seed": cfg.seed,
    }
    _write_json(cfg.out / "solution.json", meta)
    _line("|phi| <= C*", bound_ok, f"max |phi| {traj.max_abs_phi():.6g}, C* {consts.C_star:.6g}")
    _line("first-integral drift", traj.drift <= cfg.tolerances["drift"], f"{traj.drift:.3e}")
    return EXIT_OK if bound_ok else EXIT_FAIL


def _random_points(rng, n, span, grid: GridSpec):
    lo, hi = span
    t = rng.uniform(lo, hi, n)
    x = rng.uniform(grid.x0, grid.x0 + grid.hx * (grid.nx - 1), n)
    z = rng.uniform(grid.z0, grid.z0 + grid.hz * (grid.nz - 1), n)
    return t, x, z


def cmd_verify_solution(cfg: RunConfig) -> int:
    tol = cfg.tolerances
    sol = _solution(cfg)
    traj = sol.spec.trajectory
    if cfg.mutate:
        sol_checked = candidate_from_trajectory(cfg.params, traj, v_shift=0.1)
    else:
        sol_checked = sol
    rng = np.random.default_rng(cfg.seed)
    lo, hi = traj.span
    t, x, z = _random_points(rng, cfg.residual_points, (lo, hi), cfg.grid)
    worst = 0.0
    for i in range(len(t)):
        worst = max(worst, max(model.pde_residual_relative(cfg.params, sol_checked.jet(t[i], x[i], z[i]))))
    checks = {"analytic_residual": {"max_relative": worst, "passed": worst <= tol["analytic_residual"]}}

    order = model.observed_order(cfg.params, sol_checked, cfg.grid)
    floor = 1e-12
    coarse_max = max(order["coarse"]["max_abs"])
    if coarse_max < floor:
        ok = True  # exact on the grid, e.g. the equilibrium member
    else:
        orders = [o for o in order["per_equation"] if o is not None] + [order["overall"]]
        ok = all(o is not None and abs(o - 2.0) <= tol["order"] for o in orders)
    order["passed"] = ok
    checks["fd_convergence"] = order

    tr, xr, zr = _random_points(rng, cfg.invariance_points, (lo, hi), cfg.grid)
    scale = 1.0 + max(np.abs(a).max() for a in sol_checked(tr, xr, zr))
    rot = rotation_invariance_check(sol_checked, math.pi / 3, (tr, xr, zr))
    dil = dilation_invariance_check(sol_checked, 0.5, (tr, xr, zr))
    checks["rotation_invariance"] = {"eps": math.pi / 3, "max_deviation": rot, "passed": rot <= tol["invariance"] * scale}
    checks["dilation_invariance"] = {"eps": 0.5, "max_deviation": dil, "passed": dil <= tol["invariance"] * scale}
    for name, chk in checks.items():
        _line(name, chk["passed"])
    passed = all(chk["passed"] for chk in checks.values())
    doc = {
        "command": "verify-solution",
        "params": _params_dict(cfg.params),
        "constants": sol.constants.as_dict(),
        "drift": traj.drift,
        "mutated_V": cfg.mutate,
        "seed": cfg.seed,
        "checks": checks,
        "passed": passed,
    }
    _write_json(cfg.out / "verify_solution.json", doc)
    return EXIT_OK if passed else EXIT_FAIL


def cmd_energy(cfg: RunConfig) -> int:
    consts = _constants(cfg)
    T = _period_or_none(consts)
    t0 = cfg.grid.t0
    window = T if T is not None else cfg.t_end - t0
    if window <= 0:
        raise ConfigError("grid.t0 must lie before t_end")
    sol = _solution(cfg, t_end=max(cfg.t_end, t0 + window + 1.0))
    p, R = cfg.params, cfg.disk_radius
    times = t0 + window * np.arange(cfg.time_samples + 1) / cfg.time_samples
    report = en.conservation_check(p, sol, R, times, cfg.tolerances["energy"])
    report.closed_form_total = en.disk_total_closed_form(p, consts.K, consts.B2, R)
    report.closed_form_max_rel_error = float(
        max(abs(tot - report.closed_form_total) for tot in report.totals) / max(1e-300, abs(report.closed_form_total))
    )
    rng = np.random.default_rng(cfg.seed)
    pts = (rng.uniform(-R, R, 64), rng.uniform(-R, R, 64))
    report.density_audit = en.density_audit(p, sol, times[:: max(1, len(times) // 16)], pts)
    _write_csv(cfg.out / "energy_totals.csv", "t,total_energy,quadrature_error", zip(report.times, report.totals, report.quadrature_errors))

    rows = []
    s = np.linspace(-R, R, 41)
    for label, (cx, cz) in {"ray_x": (1.0, 0.0), "ray_z": (0.0, 1.0), "ray_diag": (math.sqrt(0.5), math.sqrt(0.5))}.items():
        rows += _profile(p, sol, consts, label, t0, s * cx, s * cz)
    th = 2 * math.pi * np.arange(64) / 64
    for frac in (0.5, 1.0):
        rows += _profile(p, sol, consts, f"circle_{frac:g}R", t0, frac * R * np.cos(th), frac * R * np.sin(th))
    _write_csv(cfg.out / "energy_profiles.csv", "kind,t,x,z,E_direct,E_closedform,D", rows)
    doc = {"command": "energy", "params": _params_dict(p), "constants": consts.as_dict(), "period": T, "seed": cfg.seed}
    doc.update(report.as_dict())
    _write_json(cfg.out / "energy_report.json", doc)
    _line("disk energy conserved", report.passed, f"variation {report.max_relative_variation:.3e}")
    return EXIT_OK if report.passed else EXIT_FAIL


def _profile(p, sol, consts, label, t, x, z):
    tt = np.full(x.shape, float(t))
    phi, dphi = sol.phi(tt)
    Ed = en.energy_density(p, sol, tt, x, z)
    Ep = en.energy_density_closedform(p, consts.K, phi, dphi, x, z)
    return [(label, t, xi, zi, a, b, a - b) for xi, zi, a, b in zip(x, z, Ed, Ep)]


def cmd_bracket_table(cfg: RunConfig) -> int:
    p = cfg.params
    a, b, c = cfg.abc
    gens = sy.catalog_f0(p, a, b, c, cfg.h) if p.f_zero else sy.catalog(p, a, b, c)
    rng = np.random.default_rng(cfg.seed)
    points = rng.uniform(-1.0, 1.0, (cfg.bracket_points, 6))
    basis_vals = np.array([[g.evaluate(pt) for g in gens] for pt in points])  # (points, gens, 6)
    design = basis_vals.transpose(0, 2, 1).reshape(-1, len(gens))
    entries = []
    for g1, g2 in combinations(gens, 2):
        vals = np.array([sy.lie_bracket(g1, g2, pt) for pt in points])
        anti = np.array([sy.lie_bracket(g2, g1, pt) for pt in points])
        max_abs = np.abs(vals).max(axis=0)
        is_zero = bool(max_abs.max() <= 1e-12)
        fit = None
        if not is_zero:
            coef, *_ = np.linalg.lstsq(design, vals.reshape(-1), rcond=None)
            resid = float(np.abs(design @ coef - vals.reshape(-1)).max())
            fit = {"coefficients": {g.name: float(k) for g, k in zip(gens, coef)}, "max_residual": resid,
                   "in_constant_span": resid <= 1e-9 * (1 + max_abs.max())}
        entries.append({
            "pair": [g1.name, g2.name],
            "max_abs_per_component": dict(zip(sy.COEFFICIENT_NAMES, map(float, max_abs))),
            "antisymmetry_error": float(np.abs(vals + anti).max()),
            "zero": is_zero,
            "catalog_fit": fit,
        })
    doc = {"command": "bracket-table", "branch": cfg.branch, "params": _params_dict(p), "seed": cfg.seed,
           "points": len(points), "brackets": entries}
    _write_json(cfg.out / "bracket_table.json", doc)
    print(f"{len(entries)} brackets, {sum(e['zero'] for e in entries)} vanish")
    return EXIT_OK


COMMANDS = {
    "verify-symmetries": cmd_verify_symmetries,
    "solve": cmd_solve,
    "verify-solution": cmd_verify_solution,
    "energy": cmd_energy,
    "bracket-table": cmd_bracket_table,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="boussym", description="Verify symmetries and the rotationally invariant solution of the rotating stratified system.")
    parser.add_argument("--print-config", action="store_true", help="print the effective config (defaults merged) and exit")
    sub = parser.add_subparsers(dest="command")
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", type=Path, help="JSON config file; keys override defaults")
        sp.add_argument("--seed", type=int, help="unsigned 64-bit seed")
        sp.add_argument("--out", type=Path, help="output directory")
        sp.add_argument("--print-config", action="store_true", help="print the effective config and exit")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        raw = load_config(getattr(args, "config", None), getattr(args, "seed", None), getattr(args, "out", None))
        if args.print_config:
            sys.stdout.write(_dump(raw))
            return EXIT_OK
        if args.command is None:
            parser.print_help()
            return EXIT_CONFIG
        cfg = resolve_config(raw)
        return COMMANDS[args.command](cfg)
    except (ConfigError, CatalogMismatchError, RegimeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (IntegrationError, QuadratureError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BoussymError as exc:
        print(f"verification error: {exc}", file=sys.stderr)
        return EXIT_FAIL


if __name__ == "__main__":
    sys.exit(main())
