"""Rotation sets of torus maps homotopic to the identity, periodic-point
search, suspension flows and first-return maps.

The rotation set of a lifted map F is estimated as the convex hull of the
displacement averages (F^n(x) - x)/n over a grid of starts; for
homeomorphisms this converges to a convex set.  A rational point interior to
the set forces a periodic point, which a damped multi-start Newton solver
hunts for (the search is incomplete: failure means "not found", never
"nonexistent").
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

import numpy as np

from . import geometry
from ._kernels import torus_maps as _tm
from .flows import PathSamples, first_leaf_return

TWO_PI = 2.0 * math.pi

_MAP_CODES = {"translation": 0, "shear": 1, "composed_shear": 2}


class NotHomotopicToIdentity(ValueError):
    """Lift equivariance fails; the rotation set is undefined."""


class NotTransverse(ValueError):
    """Flow is not uniformly transverse to the fibration."""


@dataclass(frozen=True)
class TorusMapLift:
    """Lift F: R^2 -> R^2 of a torus map, with F(x + k) = F(x) + k.

    Built-in kinds evaluate in closed form (and iterate in the compiled
    kernels); custom kinds wrap a vectorized callable on (N, 2) arrays.
    """

    kind: str
    params: tuple = ()
    fn: Callable | None = None

    @property
    def code(self) -> int | None:
        return _MAP_CODES.get(self.kind)

    def _param4(self) -> np.ndarray:
        p = np.zeros(4)
        p[: len(self.params)] = self.params
        return p

    def __call__(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        P = np.atleast_2d(pts)
        a, b, c, d = self._param4()
        if self.kind == "translation":
            out = P + np.array([a, b])
        elif self.kind == "shear":
            out = np.stack(
                [
                    P[:, 0] + a + c * np.sin(TWO_PI * P[:, 1]),
                    P[:, 1] + b + d * np.sin(TWO_PI * P[:, 0]),
                ],
                axis=1,
            )
        elif self.kind == "composed_shear":
            xn = P[:, 0] + a + c * np.sin(TWO_PI * P[:, 1])
            out = np.stack([xn, P[:, 1] + b + d * np.sin(TWO_PI * xn)], axis=1)
        elif self.kind == "custom":
            out = np.atleast_2d(np.asarray(self.fn(P), dtype=float))
        else:
            raise ValueError(f"unknown map kind {self.kind!r}")
        return out[0] if single else out

    def iterate(self, pts, n: int) -> np.ndarray:
        out = np.asarray(pts, dtype=float)
        for _ in range(n):
            out = self(out)
        return out


def translation(alpha) -> TorusMapLift:
    a = np.asarray(alpha, dtype=float)
    return TorusMapLift("translation", (float(a[0]), float(a[1])))


def shear(a: float, b: float, c: float, d: float) -> TorusMapLift:
    """Additive double shear; a homeomorphism only for 4 pi^2 c d < 1."""
    return TorusMapLift("shear", (a, b, c, d))


def composed_shear(a: float, b: float, c: float, d: float) -> TorusMapLift:
    """Vertical-after-horizontal shear; a homeomorphism for any amplitudes."""
    return TorusMapLift("composed_shear", (a, b, c, d))


def custom_map(fn: Callable) -> TorusMapLift:
    return TorusMapLift("custom", (), fn)


def conjugate_by_automorphism(F: TorusMapLift, A) -> TorusMapLift:
    """A o F o A^{-1} for a lattice automorphism A in GL(2, Z).

    Conjugation transports the rotation set: rho(A F A^{-1}) = A rho(F).
    """
    A = np.asarray(A, dtype=np.int64)
    det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
    if abs(det) != 1:
        raise ValueError("conjugation requires a unimodular integer matrix")
    inv = det * np.array([[A[1, 1], -A[0, 1]], [-A[1, 0], A[0, 0]]], dtype=np.int64)
    Af = A.astype(float)
    invf = inv.astype(float)

    def fn(P):
        return F(np.atleast_2d(P) @ invf.T) @ Af.T

    return custom_map(fn)


def check_equivariance(F: TorusMapLift, samples: int = 64, seed: int = 0,
                       tol: float = 1e-9) -> bool:
    """Spot-check F(x + e_i) = F(x) + e_i on random points."""
    rng = np.random.Generator(np.random.Philox(seed))
    pts = rng.random((samples, 2))
    base = F(pts)
    for k in (np.array([1.0, 0.0]), np.array([0.0, 1.0])):
        dev = np.abs(F(pts + k) - base - k).max()
        if dev > tol:
            return False
    return True


@dataclass(frozen=True)
class RotationSet:
    """Convex hull (CCW vertices) of sampled displacement averages."""

    vertices: np.ndarray
    sample_count: int
    iterate_depth: int

    def area(self) -> float:
        return geometry.polygon_area(self.vertices)

    def interior_margin(self, point) -> float:
        return geometry.interior_margin(point, self.vertices)

    def to_json(self) -> dict:
        return {"vertices": [[float(x), float(y)] for x, y in np.atleast_2d(self.vertices)]}

    def save(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, sort_keys=True)


def mz_rotation_set(F: TorusMapLift, grid: int = 64, n_iter: int = 2000) -> RotationSet:
    """Rotation set estimate: hull of (F^n(x) - x)/n over a grid of starts.

    Refuses maps whose lift is not equivariant (the rotation set is only
    defined for maps homotopic to the identity).
    """
    if not check_equivariance(F):
        raise NotHomotopicToIdentity("lift fails F(x+k) = F(x)+k")
    code = F.code
    if code is not None:
        disp = _tm.displacement_averages(code, F._param4(), grid, n_iter)
    else:
        ii, jj = np.meshgrid(np.arange(grid), np.arange(grid), indexing="ij")
        pts = np.stack([ii.ravel(), jj.ravel()], axis=1) / grid
        cur = pts.copy()
        for _ in range(n_iter):
            cur = F(cur)
        disp = (cur - pts) / n_iter
    hull = geometry.convex_hull(disp)
    return RotationSet(vertices=hull, sample_count=grid * grid, iterate_depth=n_iter)


@dataclass(frozen=True)
class RationalInteriorPoints:
    points: list  # [((p1, p2), q)] reduced, sorted by (q, p)
    degenerate: bool

    def as_vectors(self) -> list[np.ndarray]:
        return [np.array([p[0] / q, p[1] / q]) for p, q in self.points]


def rational_interior_points(
    rs: RotationSet, denominator_bound: int, margin: float = 0.02
) -> RationalInteriorPoints:
    """All reduced rationals p/q, q <= bound, strictly inside the hull with
    at least the given margin (tied to the hull estimation accuracy)."""
    if rs.area() <= 1e-9:
        return RationalInteriorPoints(points=[], degenerate=True)
    verts = rs.vertices
    lo = verts.min(axis=0)
    hi = verts.max(axis=0)
    seen = set()
    out = []
    for q in range(1, denominator_bound + 1):
        p1_range = range(math.floor(lo[0] * q) - 1, math.ceil(hi[0] * q) + 2)
        p2_range = range(math.floor(lo[1] * q) - 1, math.ceil(hi[1] * q) + 2)
        for p1 in p1_range:
            for p2 in p2_range:
                f1, f2 = Fraction(p1, q), Fraction(p2, q)
                key = (f1, f2)
                if key in seen:
                    continue
                pt = np.array([p1 / q, p2 / q])
                if rs.interior_margin(pt) > margin:
                    seen.add(key)
                    qq = int(np.lcm(f1.denominator, f2.denominator))
                    out.append(((int(f1 * qq), int(f2 * qq)), qq))
    out.sort(key=lambda pq: (pq[1], pq[0]))
    return RationalInteriorPoints(points=out, degenerate=False)


@dataclass(frozen=True)
class PeriodicOrbitResult:
    found: bool
    point: np.ndarray
    period: int
    translation: np.ndarray
    residual: float

    def to_json(self) -> dict:
        return {
            "found": bool(self.found),
            "point": [float(v) for v in self.point],
            "period": int(self.period),
            "translation": [int(v) for v in self.translation],
            "residual": float(self.residual),
        }


def find_periodic_point(
    F: TorusMapLift,
    p,
    q: int,
    seeds=None,
    tol: float = 1e-10,
    max_newton: int = 60,
) -> PeriodicOrbitResult:
    """Multi-start damped Newton on G(x) = F^q(x) - x - p.

    Succeeds when some root reaches |G| < tol; otherwise reports the best
    residual found (absence of a periodic point is never certified).
    """
    if not 1 <= q <= 64:
        raise ValueError("period q must lie in 1..64")
    p = np.asarray(p, dtype=float)
    if seeds is None:
        gx, gy = np.meshgrid(np.arange(8) / 8, np.arange(4) / 4 + 0.07, indexing="ij")
        seeds = np.stack([gx.ravel(), gy.ravel()], axis=1)
    seeds = np.atleast_2d(np.asarray(seeds, dtype=float))

    def G(x):
        return F.iterate(x, q) - x - p

    best_x, best_r = seeds[0], np.inf
    fd = 1e-7
    for seed in seeds:
        x = seed.copy()
        for _ in range(max_newton):
            g = G(x)
            r = float(np.max(np.abs(g)))
            if r < best_r:
                best_r, best_x = r, x.copy()
            if r < tol:
                return PeriodicOrbitResult(
                    found=True, point=np.mod(x, 1.0), period=q,
                    translation=np.rint(p).astype(np.int64), residual=r,
                )
            J = np.empty((2, 2))
            for j in range(2):
                e = np.zeros(2)
                e[j] = fd
                J[:, j] = (G(x + e) - G(x - e)) / (2 * fd)
            try:
                step = np.linalg.solve(J, g)
            except np.linalg.LinAlgError:
                break
            lam = 1.0
            while lam > 1e-4:
                if np.max(np.abs(G(x - lam * step))) < r:
                    break
                lam *= 0.5
            x = x - lam * step
    return PeriodicOrbitResult(
        found=best_r < tol, point=np.mod(best_x, 1.0), period=q,
        translation=np.rint(p).astype(np.int64), residual=float(best_r),
    )


# --- suspensions --------------------------------------------------------------


class SuspensionFlow:
    """Unit-speed suspension of a lifted torus map on T^3.

    Coordinate 0 is the suspension circle; at integer times the transverse
    pair advances by the map, linearly interpolated in between (so paths are
    continuous and the per-period displacement is exactly the map's).
    Trajectories must start on an integer leaf.
    """

    dim = 3

    def __init__(self, F: TorusMapLift):
        self.map = F
        self._cache: dict[bytes, np.ndarray] = {}

    def _iterates(self, y0: np.ndarray, n: int) -> np.ndarray:
        key = y0.tobytes()
        seq = self._cache.get(key)
        if seq is None or len(seq) < n + 1:
            target = max(n, 8)
            if self.map.code is not None:
                seq = _tm.iterate_sequence(
                    self.map.code, self.map._param4(), float(y0[0]), float(y0[1]), target
                )
            else:
                rows = [np.asarray(y0, dtype=float)]
                for _ in range(target):
                    rows.append(self.map(rows[-1]))
                seq = np.stack(rows)
            self._cache[key] = seq
        return seq

    def advance(self, x0, t: float) -> np.ndarray:
        x0 = np.asarray(x0, dtype=float)
        s0 = x0[0]
        if abs(s0 - round(s0)) > 1e-9:
            raise ValueError("suspension trajectories must start on an integer leaf")
        y0 = x0[1:]
        if t < 0:
            raise ValueError("backward suspension time unsupported")
        m = int(math.floor(t + 1e-12))
        frac = t - m
        seq = self._iterates(y0, m + 1)
        y = seq[m] + frac * (seq[m + 1] - seq[m])
        return np.concatenate([[s0 + t], y])

    def trajectory(self, x0, T: float, nsamples: int = 257) -> PathSamples:
        ts = np.linspace(0.0, T, nsamples)
        xs = np.stack([self.advance(x0, t) for t in ts])
        return PathSamples(ts, xs)


def suspension_flow(F: TorusMapLift) -> SuspensionFlow:
    if not check_equivariance(F):
        raise NotHomotopicToIdentity("lift fails F(x+k) = F(x)+k")
    return SuspensionFlow(F)


def suspension_homology_set(F: TorusMapLift, grid: int = 64, n_iter: int = 2000) -> np.ndarray:
    """Predicted asymptotic homology set per suspension period: the fiber
    class extended by the rotation set, {(1, s): s in rho(F)} as (V, 3)."""
    rs = mz_rotation_set(F, grid=grid, n_iter=n_iter)
    verts = np.atleast_2d(rs.vertices)
    return np.column_stack([np.ones(len(verts)), verts])


def poincare_return_map(
    flow,
    fibration_covector,
    transversality_margin: float = 0.1,
    bisect_tol: float = 1e-10,
    probe_grid: int = 3,
) -> TorusMapLift:
    """First-return map of a flow to a leaf of an axis-aligned fibration.

    The covector must be +-1 on a single axis (level sets x_axis = const).
    Transversality is probed on a coarse leaf grid; event detection brackets
    the unit increase of the fibration value and bisects the crossing time.
    The returned lift acts on the transverse coordinates in their input
    order.
    """
    cov = np.asarray(fibration_covector, dtype=float)
    n = cov.size
    nz = np.nonzero(cov)[0]
    if len(nz) != 1 or abs(cov[nz[0]]) != 1.0:
        raise ValueError("only axis-aligned unit fibration covectors are supported")
    axis = int(nz[0])
    sgn = float(cov[axis])
    others = [i for i in range(n) if i != axis]
    if len(others) != 2:
        raise ValueError("return maps are built for 3-dimensional flows")

    h = 1e-4
    probes = np.stack(
        np.meshgrid(*([np.arange(probe_grid) / probe_grid + 0.05] * 2), indexing="ij"),
        axis=-1,
    ).reshape(-1, 2)
    for y in probes:
        x0 = np.zeros(n)
        x0[others] = y
        v = (flow.advance(x0, h) - x0) / h
        speed = np.linalg.norm(v)
        if speed == 0 or abs(v[axis]) / speed <= transversality_margin:
            raise NotTransverse(
                f"flow direction pairs with the fibration at margin "
                f"{0 if speed == 0 else abs(v[axis]) / speed:.3g}"
            )

    def return_one(y):
        x0 = np.zeros(n)
        x0[others] = y
        t1 = first_leaf_return(flow, x0, sgn * np.eye(n)[axis], 1.0, tol=bisect_tol)
        xT = flow.advance(x0, t1)
        return xT[others]

    def fn(pts):
        pts = np.atleast_2d(pts)
        return np.stack([return_one(y) for y in pts])

    return custom_map(fn)


# --- independence of measured homologies --------------------------------------


@dataclass(frozen=True)
class HedlundVerdict:
    kind: str  # "degenerate" | "periodic_search"
    det: float
    rational_points: list
    periodic_results: list

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "det": self.det,
            "rational_points": [[list(p), q] for p, q in self.rational_points],
            "periodic_results": [r.to_json() for r in self.periodic_results],
        }


def hedlund_scenario_check(
    F: TorusMapLift,
    sigmas,
    denominator_bound: int = 3,
    margin: float = 0.02,
    tol: float = 1e-10,
) -> HedlundVerdict:
    """Given three measured suspension homologies (1, sigma_i): when the
    3x3 matrix of them is nonsingular the sigma_i are in general position,
    the rotation set has interior, and every rational interior point feeds a
    periodic-point search.  Otherwise the configuration is degenerate."""
    sigmas = np.asarray(sigmas, dtype=float)
    if sigmas.shape != (3, 2):
        raise ValueError("expected three planar rotation vectors")
    mat = np.column_stack([np.ones(3), sigmas])
    det = float(np.linalg.det(mat))
    if abs(det) <= 1e-6:
        return HedlundVerdict("degenerate", det, [], [])
    hull = geometry.convex_hull(sigmas)
    rs = RotationSet(vertices=hull, sample_count=3, iterate_depth=0)
    rats = rational_interior_points(rs, denominator_bound, margin=margin)
    results = [
        find_periodic_point(F, np.asarray(p, dtype=float), q, tol=tol)
        for p, q in rats.points
    ]
    return HedlundVerdict("periodic_search", det, rats.points, results)
