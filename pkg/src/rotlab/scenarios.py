"""Scenario registry for the command-line runner.

Each scenario validates a strict parameter schema, runs deterministically
for a fixed (config, seed, backend), embeds the thresholds it was judged
against in its report, and writes side tables (CSV, polygon JSON) next to
report.json.  Randomness always comes from a counter-based Philox generator
seeded by the config seed, so alternate implementations can reproduce the
streams.
"""

from __future__ import annotations

import csv
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from . import __version__
from ._backend import BACKEND
from . import asymptotic as asy
from . import geometry
from . import hamiltonian as ham
from . import homology
from . import mather
from . import rotation_sets as rset
from . import torus_geometry as tg
from .flows import LinearFlow

SQRT2 = math.sqrt(2.0)
SQRT3 = math.sqrt(3.0)
_NAMED_REALS = {"sqrt2": SQRT2, "sqrt3": SQRT3, "sqrt5": math.sqrt(5.0)}


class ConfigError(ValueError):
    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


@dataclass(frozen=True)
class Param:
    default: object
    kind: str  # "int" | "float" | "str" | "list" | "bool"
    help: str = ""
    check: Callable | None = None
    check_msg: str = ""


@dataclass(frozen=True)
class Scenario:
    name: str
    params: dict
    runner: Callable
    help: str = ""


def _coerce(name: str, spec: Param, value):
    kind = spec.kind
    ok = {
        "int": lambda v: isinstance(v, int) and not isinstance(v, bool),
        "float": lambda v: isinstance(v, (int, float)) and not isinstance(v, bool),
        "str": lambda v: isinstance(v, str),
        "bool": lambda v: isinstance(v, bool),
        "list": lambda v: isinstance(v, list),
    }[kind]
    if not ok(value):
        raise ConfigError(f"parameters.{name}", f"expected {kind}")
    if kind == "float":
        value = float(value)
    if spec.check is not None and not spec.check(value):
        raise ConfigError(f"parameters.{name}", spec.check_msg or "invalid value")
    return value


def validate_config(config: dict) -> list[str]:
    """Schema check only; returns human-readable diagnostics (empty = valid)."""
    diags = []
    allowed_top = {"scenario", "seed", "parameters", "output_dir"}
    for key in config:
        if key not in allowed_top:
            diags.append(f"{key}: unknown top-level key")
    name = config.get("scenario")
    if not isinstance(name, str) or name not in SCENARIOS:
        diags.append(
            f"scenario: unknown scenario id {name!r}; "
            f"choose from {sorted(SCENARIOS)}"
        )
        return diags
    seed = config.get("seed", 0)
    if not isinstance(seed, int) or isinstance(seed, bool):
        diags.append("seed: expected an integer")
    params = config.get("parameters", {})
    if not isinstance(params, dict):
        diags.append("parameters: expected an object")
        return diags
    spec = SCENARIOS[name].params
    for key, value in params.items():
        if key not in spec:
            diags.append(f"parameters.{key}: unknown parameter for {name}")
            continue
        try:
            _coerce(key, spec[key], value)
        except ConfigError as exc:
            diags.append(str(exc))
    return diags


def resolve_params(name: str, params: dict) -> dict:
    spec = SCENARIOS[name].params
    out = {}
    for key, p in spec.items():
        out[key] = _coerce(key, p, params[key]) if key in params else p.default
    for key in params:
        if key not in spec:
            raise ConfigError(f"parameters.{key}", f"unknown parameter for {name}")
    return out


def _real(value):
    if isinstance(value, str):
        if value not in _NAMED_REALS:
            raise ConfigError("parameters", f"unknown named real {value!r}")
        return _NAMED_REALS[value]
    return float(value)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return [_jsonable(v) for v in obj.tolist()]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if obj is homology.NOT_PROPER:
        return "NotProper"
    return obj


def _write_csv(path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(v) if isinstance(v, float) else v for v in row])


# --- scenarios ----------------------------------------------------------------


def _run_linear_flow(params, seed, outdir):
    v = np.array([_real(x) for x in params["velocity"]], dtype=float)
    T = params["T"]
    model = ham.MechanicalModel(dim=v.size)
    cfg = ham.IntegratorConfig(scheme="verlet", step=params["step"])
    traj = ham.integrate(model, np.zeros(v.size), v, T, cfg)
    est = asy.rotation_vector(traj)
    err = float(np.max(np.abs(est.value - v)))
    traj.to_csv(outdir / "trajectory.csv")
    thresholds = {"rotation_error": 1e-9, "cauchy_gap": 1e-9}
    results = {
        "rotation_estimate": est.value,
        "rotation_error": err,
        "cauchy_gap": est.cauchy_gap,
        "horizon": est.horizon,
    }
    checks = {
        "rotation_error": err < thresholds["rotation_error"],
        "cauchy_gap": est.cauchy_gap < thresholds["cauchy_gap"],
    }
    return results, checks, thresholds


def _run_mane_example(params, seed, outdir):
    rng = np.random.Generator(np.random.Philox(seed))
    n_starts = params["n_starts"]
    T = params["T"]
    starts = rng.random((n_starts, 2))
    # the two periodic orbits of the zero section, plus the random ensemble
    orbit_starts = np.array([[0.25, 0.1], [0.75, 0.6]])
    x0s = np.vstack([orbit_starts, starts])
    p0s = np.zeros_like(x0s)
    rec = [T / 8, T / 4, T / 2, T]
    times, xs, hs, dev = ham.integrate_circle_field_ensemble(
        x0s, p0s, T, params["step"], record_times=rec
    )

    orbits = ham.mane_zero_section_orbits(step=1e-3)
    per_period = {
        repr(o.base_x1): {"class": o.homology_class, "residual": o.residual}
        for o in orbits
    }

    ests = (xs[:, -1, :] - x0s) / T
    random_err = float(np.max(np.abs(ests[2:] - np.array([0.0, 1.0]))))

    # accumulation clusters over the dyadic horizons
    pts = []
    for i in range(x0s.shape[0]):
        for j, t in enumerate(times):
            if t > 0:
                pts.append(np.rint(xs[i, j] - x0s[i]) / t)
    clusters = _cluster(np.asarray(pts), radius=0.05)
    centers = [c[0] for c in clusters]
    axis = centers[0]
    slope = homology.minimal_slope(axis, homology.euclidean_norm(), centers)

    _write_csv(
        outdir / "rotation_estimates.csv",
        ["x1", "x2", "rot1", "rot2"],
        [
            [float(x0s[i, 0]), float(x0s[i, 1]), float(ests[i, 0]), float(ests[i, 1])]
            for i in range(len(x0s))
        ],
    )
    _write_csv(
        outdir / "clusters.csv",
        ["center1", "center2", "radius", "count"],
        [[float(c[0][0]), float(c[0][1]), float(c[1]), c[2]] for c in clusters],
    )

    thresholds = {
        "orbit_class_residual": 1e-9,
        "random_rotation_error": 1e-2,
        "max_energy_dev": 1e-9,
    }
    results = {
        "periodic_orbits": per_period,
        "random_rotation_error": random_err,
        "max_energy_dev": float(dev.max()),
        "clusters": [
            {"center": c[0], "radius": c[1], "count": c[2]} for c in clusters
        ],
        "minimal_slope": slope,
    }
    checks = {
        "periodic_classes_exact": all(
            o.residual < thresholds["orbit_class_residual"] for o in orbits
        ),
        "random_starts_converge": random_err < thresholds["random_rotation_error"],
        "energy_conserved": float(dev.max()) < thresholds["max_energy_dev"],
        "no_proper_cone": slope is homology.NOT_PROPER,
    }
    return results, checks, thresholds


def _cluster(pts, radius):
    parent = list(range(len(pts)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            if np.linalg.norm(pts[i] - pts[j]) < radius:
                parent[find(i)] = find(j)
    groups = {}
    for i in range(len(pts)):
        groups.setdefault(find(i), []).append(i)
    out = []
    for members in groups.values():
        sub = pts[members]
        center = sub.mean(axis=0)
        rad = float(np.max(np.linalg.norm(sub - center, axis=1)))
        out.append((center, rad, len(members)))
    out.sort(key=lambda c: (-c[2], tuple(np.round(c[0], 12))))
    return out


def _tilted_norm(velocity: np.ndarray) -> homology.NormModel:
    """Stable norm of the constant metric that makes the tilted linear flow
    orthogonal to the x1 = const fibration (projection construction)."""
    n = velocity.size
    e1 = np.zeros(n)
    e1[0] = 1.0
    PH = np.outer(velocity, e1) / velocity[0]
    PV = np.eye(n) - PH
    M = PH.T @ PH + PV.T @ PV
    return homology.quadratic_norm(M)


def _run_cone_audit(params, seed, outdir):
    variant = params["variant"]
    m_max = params["m_max"]
    tol = params["slack_tolerance"]
    if variant == "product":
        v = np.array([1.0, 0.0, 0.0])
        norm = homology.euclidean_norm()
    elif variant == "tilted":
        v = np.array([1.0, _real(params["tilt_a"]), _real(params["tilt_b"])])
        norm = _tilted_norm(v)
    else:
        raise ConfigError("parameters.variant", "expected 'product' or 'tilted'")
    flow = LinearFlow(v)
    h = np.array([1, 0, 0])
    audit = asy.cone_bound_audit(flow, np.zeros(3), h, m_max, norm)
    audit.to_csv(outdir / "ratios.csv")
    lim_lo = max(1, (m_max + 1) // 2)
    thresholds = {"slack_tolerance": tol, "limsup_bound": 3.0 + tol}
    results = {
        "variant": variant,
        "velocity": v,
        "axis_norm": audit.axis_norm,
        "diameter": audit.diameter,
        "return_time": audit.return_time,
        "max_ratio": max(r.ratio for r in audit.rows),
        "max_excess": audit.max_excess(),
        "limsup_estimate": audit.limsup_estimate,
        "limsup_window": [lim_lo, m_max],
    }
    checks = {
        "ratios_within_bound": audit.max_excess() <= tol,
        "limsup_below_3": audit.limsup_estimate <= 3.0 + tol,
    }
    return results, checks, thresholds


def _make_map(params) -> rset.TorusMapLift:
    kind = params["map"]
    args = [float(x) for x in params["map_params"]]
    if kind == "translation":
        return rset.translation(args[:2])
    if kind == "shear":
        return rset.shear(*args[:4])
    if kind == "composed_shear":
        return rset.composed_shear(*args[:4])
    raise ConfigError("parameters.map", f"unknown map kind {kind!r}")


def _run_rotation_set(params, seed, outdir):
    F = _make_map(params)
    grid, n_iter = params["grid"], params["n_iter"]
    rs = rset.mz_rotation_set(F, grid=grid, n_iter=n_iter)
    rs.save(outdir / "polygons.json")

    # lattice-automorphism equivariance on the translation part
    A = np.array([[1, 1], [0, 1]])
    conj = rset.custom_map(
        lambda P: (F(P @ np.linalg.inv(A).T) @ A.T)
    )
    rs_conj = rset.mz_rotation_set(conj, grid=min(grid, 32), n_iter=min(n_iter, 400))
    rs_small = rset.mz_rotation_set(F, grid=min(grid, 32), n_iter=min(n_iter, 400))
    mapped = geometry.convex_hull(np.atleast_2d(rs_small.vertices) @ A.T)
    conj_dev = geometry.hausdorff_convex(np.atleast_2d(rs_conj.vertices), mapped)

    thresholds = {"translation_collapse": 1e-6, "conjugation_equivariance": 1e-6}
    results = {
        "vertices": rs.vertices,
        "area": rs.area(),
        "sample_count": rs.sample_count,
        "iterate_depth": rs.iterate_depth,
        "conjugation_deviation": conj_dev,
    }
    checks = {"conjugation_equivariance": conj_dev < 1e-6 or F.kind != "translation"}
    if F.kind == "translation":
        alpha = np.array([float(x) for x in params["map_params"][:2]])
        dev = float(np.max(np.abs(np.atleast_2d(rs.vertices) - alpha)))
        results["translation_deviation"] = dev
        checks["translation_collapse"] = dev < thresholds["translation_collapse"]
        checks["conjugation_equivariance"] = conj_dev < 1e-6
    if params["with_oracle"]:
        oracle = rset.mz_rotation_set(F, grid=params["oracle_grid"], n_iter=params["oracle_n_iter"])
        hd = geometry.hausdorff_convex(rs.vertices, oracle.vertices)
        results["oracle_hausdorff"] = hd
        thresholds["oracle_hausdorff"] = 0.02
        checks["oracle_hausdorff"] = hd < 0.02
    return results, checks, thresholds


_FRANKS_CONJUGATORS = [
    [[1, 0], [0, 1]], [[1, 1], [0, 1]], [[1, 0], [1, 1]], [[1, -1], [0, 1]],
    [[1, 0], [-1, 1]], [[0, -1], [1, 0]], [[1, 1], [1, 2]], [[2, 1], [1, 1]],
    [[1, -1], [1, 0]], [[2, -1], [-1, 1]],
]


def franks_family(count: int = 10) -> list[tuple[str, rset.TorusMapLift]]:
    """Curated family with fat rotation sets around the origin.

    The amplitude-1/2 vertical-after-horizontal shear has periodic orbits on
    the quarter lattice with rotation vectors (+-1/2, 0) and (0, +-1/2), so
    its rotation set contains the diamond hull of those.  Conjugating by
    lattice automorphisms transports the set (and the orbits stay on the
    quarter lattice), keeping the origin interior with margin >= 0.13 across
    the family.
    """
    base = rset.composed_shear(0.0, 0.0, 0.5, 0.5)
    out = []
    for A in _FRANKS_CONJUGATORS[:count]:
        label = f"A={A}"
        out.append((label, rset.conjugate_by_automorphism(base, A)))
    return out


def _run_franks_experiment(params, seed, outdir, workers: int = 1):
    maps = franks_family(params["n_maps"])
    grid, n_iter, Q = params["grid"], params["n_iter"], params["q_max"]
    margin = params["interior_margin"]

    def run_one(F):
        rs = rset.mz_rotation_set(F, grid=grid, n_iter=n_iter)
        rats = rset.rational_interior_points(rs, Q, margin=margin)
        found = []
        for p, q in rats.points:
            res = rset.find_periodic_point(F, p, q)
            found.append(res)
            if res.found:
                break
        best = min(found, key=lambda r: r.residual) if found else None
        return rs, rats, best

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            outs = list(ex.map(run_one, [F for _, F in maps]))
    else:
        outs = [run_one(F) for _, F in maps]

    rows = []
    per_map = []
    all_found = True
    for (label, _), (rs, rats, best) in zip(maps, outs):
        ok = best is not None and best.found and best.residual < 1e-10
        all_found &= ok
        margin0 = rs.interior_margin([0.0, 0.0])
        rows.append(
            [label, repr(float(margin0)), len(rats.points),
             repr(float(best.residual)) if best else "nan", int(ok)]
        )
        per_map.append(
            {
                "conjugator": label,
                "origin_margin": margin0,
                "n_rational_points": len(rats.points),
                "best_orbit": best.to_json() if best else None,
            }
        )
    with open(outdir / "residuals.csv", "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["map", "origin_margin", "n_rationals", "best_residual", "found"])
        w.writerows(rows)
    thresholds = {"residual": 1e-10, "interior_margin": margin}
    results = {"maps": per_map}
    checks = {"periodic_point_per_map": all_found}
    return results, checks, thresholds


def _run_mather_table(params, seed, outdir):
    model_name = params["model"]
    grid_n = params["grid"]
    if model_name == "flat":
        model = ham.MechanicalModel(dim=2)
    elif model_name == "pendulum":
        model = ham.MechanicalModel(dim=2, potential=ham.CosinePotential(1.0, 0))
    else:
        raise ConfigError("parameters.model", "expected 'flat' or 'pendulum'")
    bt = mather.BetaTable(model, nodes=params["nodes"], q_max=params["q_max"])
    box = ([-1.8, -1.8], [1.8, 1.8])
    al = mather.AlphaEvaluator(bt, box=box)

    hs = np.linspace(-1, 1, grid_n)
    beta_err = 0.0
    for h1 in hs:
        for h2 in hs:
            v = bt([h1, h2])
            if model_name == "flat":
                beta_err = max(beta_err, abs(v - 0.5 * (h1 * h1 + h2 * h2)))
    alpha_err = 0.0
    for c1 in hs:
        for c2 in hs:
            a = al([c1, c2])
            if model_name == "flat":
                alpha_err = max(alpha_err, abs(a - 0.5 * (c1 * c1 + c2 * c2)))

    al.refresh()
    fy_min = np.inf
    for (wk, wq), ev in bt._cache.items():
        hvec = np.array(wk) / wq
        for ckey, aval in al._cache.items():
            c = np.array(ckey)
            fy_min = min(fy_min, aval + ev.value - float(c @ hvec))

    bt.to_csv(outdir / "beta_table.csv")
    al.to_csv(outdir / "alpha_table.csv")

    thresholds = {"beta_error": 1e-3, "alpha_error": 2e-3,
                  "alpha0_error": 2e-3, "fenchel_young": -1e-6}
    results: dict = {"fenchel_young_min": float(fy_min)}
    checks = {"fenchel_young": float(fy_min) >= thresholds["fenchel_young"]}
    if model_name == "flat":
        results["beta_error"] = beta_err
        results["alpha_error"] = alpha_err
        checks["beta_quadratic"] = beta_err < thresholds["beta_error"]
        checks["alpha_quadratic"] = alpha_err < thresholds["alpha_error"]
    else:
        a0 = al([0.0, 0.0])
        pot_grid = model.potential.grid(2, 64)
        crit = ham.critical_value_mechanical(pot_grid)
        results["alpha_at_zero"] = a0
        results["critical_value"] = crit
        checks["alpha0_matches_critical"] = abs(a0 - crit) < thresholds["alpha0_error"]
    return results, checks, thresholds


def _run_hedlund_check(params, seed, outdir):
    F = _make_map(params)
    n_iter = params["n_iter"]
    starts = np.asarray(params["starts"], dtype=float).reshape(-1, 2)
    sigmas = []
    for y in starts:
        seq = F.iterate(y, n_iter)
        sigmas.append((seq - y) / n_iter)
    sigmas = np.asarray(sigmas)
    verdict = rset.hedlund_scenario_check(
        F, sigmas, denominator_bound=params["q_max"], margin=params["interior_margin"]
    )
    with open(outdir / "verdict.json", "w") as fh:
        json.dump(_jsonable(verdict.to_json()), fh, sort_keys=True, indent=2)
    found_any = any(r.found for r in verdict.periodic_results)
    thresholds = {"det_tolerance": 1e-6, "residual": 1e-10}
    results = {
        "sigmas": sigmas,
        "verdict": verdict.kind,
        "det": verdict.det,
        "n_rational_points": len(verdict.rational_points),
        "n_periodic_found": sum(r.found for r in verdict.periodic_results),
    }
    checks = {
        "independent_triggers_search": verdict.kind == "periodic_search",
        "periodic_orbit_found": found_any,
    }
    return results, checks, thresholds


def _run_tischler_demo(params, seed, outdir):
    c = np.array([_real(x) for x in params["one_form_class"]], dtype=float)
    eps = params["eps"]
    fib = tg.tischler_fibration(c, eps)
    fiber = tg.verify_fiber_torus(fib)
    with open(outdir / "fibration.json", "w") as fh:
        json.dump(
            _jsonable(
                {
                    "p": fib.p,
                    "q": fib.q,
                    "primitive_p": fib.primitive_p,
                    "error": fib.error,
                    "dirichlet_bound": fib.dirichlet_bound,
                    "fiber": fiber,
                }
            ),
            fh,
            sort_keys=True,
            indent=2,
        )
    thresholds = {"eps": eps}
    results = {
        "p": fib.p,
        "q": fib.q,
        "primitive_p": fib.primitive_p,
        "error": fib.error,
        "dirichlet_bound": fib.dirichlet_bound,
        "fiber_verified": fiber["verified"],
    }
    checks = {
        "approximation_error": fib.error <= eps + 1e-15,
        "q_below_dirichlet": fib.q <= fib.dirichlet_bound,
        "fiber_connected_torus": bool(fiber["verified"]),
    }
    return results, checks, thresholds


SCENARIOS: dict[str, Scenario] = {
    "linear_flow": Scenario(
        "linear_flow",
        {
            "velocity": Param([1.0, 0.6180339887498949], "list", "flow velocity"),
            "T": Param(100.0, "float", "horizon", lambda v: v > 0, "T must be positive"),
            "step": Param(0.01, "float", "integrator step",
                          lambda v: 0 < v < 0.1, "step must be in (0, 0.1)"),
        },
        _run_linear_flow,
        "rotation vector of a flat linear flow",
    ),
    "mane_example": Scenario(
        "mane_example",
        {
            "n_starts": Param(100, "int", "random starts on the zero section",
                              lambda v: v >= 1, "n_starts must be >= 1"),
            "T": Param(1e4, "float", "horizon", lambda v: v > 0, "T must be positive"),
            "step": Param(0.02, "float", "rk4 step",
                          lambda v: 0 < v < 0.1, "step must be in (0, 0.1)"),
        },
        _run_mane_example,
        "critical-level example: homologies escape every proper cone",
    ),
    "cone_audit": Scenario(
        "cone_audit",
        {
            "variant": Param("product", "str", "product | tilted",
                             lambda v: v in ("product", "tilted"),
                             "variant must be 'product' or 'tilted'"),
            "tilt_a": Param(0.3536, "float", "second velocity component"),
            "tilt_b": Param(0.1732, "float", "third velocity component"),
            "m_max": Param(50, "int", "largest quasi-orbit multiple",
                           lambda v: v >= 2, "m_max must be >= 2"),
            "slack_tolerance": Param(0.05, "float", "bound slack"),
        },
        _run_cone_audit,
        "slope-3 bound audit for fibred flows on the 3-torus",
    ),
    "rotation_set": Scenario(
        "rotation_set",
        {
            "map": Param("shear", "str", "translation | shear | composed_shear"),
            "map_params": Param([0.1, 0.1, 0.1, 0.1], "list", "map parameters"),
            "grid": Param(64, "int", "starts per axis", lambda v: v >= 2, ">= 2"),
            "n_iter": Param(2000, "int", "iterates", lambda v: v >= 1, ">= 1"),
            "with_oracle": Param(False, "bool", "compare against refined oracle"),
            "oracle_grid": Param(256, "int", "oracle starts per axis"),
            "oracle_n_iter": Param(20000, "int", "oracle iterates"),
        },
        _run_rotation_set,
        "rotation set of a torus map homotopic to the identity",
    ),
    "franks_experiment": Scenario(
        "franks_experiment",
        {
            "n_maps": Param(10, "int", "family size", lambda v: 1 <= v <= 10, "1..10"),
            "grid": Param(64, "int", "starts per axis"),
            "n_iter": Param(2000, "int", "iterates"),
            "q_max": Param(3, "int", "rational denominator bound"),
            "interior_margin": Param(0.05, "float", "interior margin"),
        },
        _run_franks_experiment,
        "rational interior points force periodic orbits",
    ),
    "mather_table": Scenario(
        "mather_table",
        {
            "model": Param("flat", "str", "flat | pendulum"),
            "grid": Param(9, "int", "grid points per axis", lambda v: v >= 3, ">= 3"),
            "nodes": Param(48, "int", "curve nodes", lambda v: v >= 16, ">= 16"),
            "q_max": Param(32, "int", "rational denominator bound"),
        },
        _run_mather_table,
        "minimal average action tables and conjugate duality",
    ),
    "hedlund_check": Scenario(
        "hedlund_check",
        {
            "map": Param("composed_shear", "str", "base map kind"),
            "map_params": Param([0.0, 0.0, 0.5, 0.5], "list", "map parameters"),
            "starts": Param([[0.0, 0.25], [0.25, 0.0], [0.0, 0.75]], "list",
                            "three base points"),
            "n_iter": Param(840, "int", "averaging iterates"),
            "q_max": Param(4, "int", "rational denominator bound"),
            "interior_margin": Param(0.02, "float", "interior margin"),
        },
        _run_hedlund_check,
        "independent suspension homologies force a periodic orbit",
    ),
    "tischler_demo": Scenario(
        "tischler_demo",
        {
            "one_form_class": Param([1.0, "sqrt2", "sqrt3"], "list",
                                    "cohomology class of the one-form"),
            "eps": Param(0.01, "float", "approximation tolerance",
                         lambda v: v >= 0, "eps must be >= 0"),
        },
        _run_tischler_demo,
        "rational approximation of a one-form by a fibration",
    ),
}


def run_scenario(config: dict, outdir: Path, workers: int = 1) -> dict:
    diags = validate_config(config)
    if diags:
        raise ConfigError("config", "; ".join(diags))
    name = config["scenario"]
    seed = int(config.get("seed", 0))
    params = resolve_params(name, config.get("parameters", {}))
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    runner = SCENARIOS[name].runner
    if name == "franks_experiment":
        results, checks, thresholds = runner(params, seed, outdir, workers=workers)
    else:
        results, checks, thresholds = runner(params, seed, outdir)
    report = {
        "scenario": name,
        "version": __version__,
        "backend": BACKEND,
        "config": {"seed": seed, "parameters": _jsonable(params)},
        "thresholds": _jsonable(thresholds),
        "results": _jsonable(results),
        "checks": {k: bool(v) for k, v in sorted(checks.items())},
        "passed": bool(all(checks.values())),
    }
    with open(outdir / "report.json", "w") as fh:
        json.dump(report, fh, sort_keys=True, indent=2)
        fh.write("\n")
    return report
