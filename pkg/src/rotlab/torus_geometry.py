"""Grid-sampled Riemannian metrics on the n-torus and the constructions on
top of them: lifts, grid geodesic distances, stable-norm estimates, metrics
that make a prescribed flow geodesic, the kinetic-energy rescaling that turns
fixed-energy mechanical orbits into geodesics, and rational approximation of
closed one-forms by fibrations over the circle.

Distances are shortest paths on a windowed grid graph (see
_kernels.grid_paths); they overestimate the continuum values by a bounded
grid/anisotropy factor, which all downstream tolerances account for.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Callable

import numpy as np

from . import homology
from ._kernels import grid_paths

DEFAULT_RESOLUTION = {2: 64, 3: 32}
MAX_WINDOW_DOMAINS = 8


class OutOfWindow(ValueError):
    """Endpoints farther apart than the supported lift window."""


class StepTooLarge(ValueError):
    """Consecutive torus samples too far apart to lift unambiguously."""


class DegeneratePairing(ValueError):
    """The one-form annihilates the vector field at some grid node."""


class SubcriticalEnergy(ValueError):
    """e + V <= 0 somewhere: the kinetic rescaling loses positivity."""


class MetricFormatError(ValueError):
    """Metric file failed validation (shape, symmetry or positivity)."""


class MetricField:
    """Positive definite symmetric bilinear form sampled on a periodic grid.

    values has shape (res,)*n + (n, n); evaluation between nodes is
    multilinear.  Immutable after construction; every stored matrix is
    checked symmetric with positive smallest eigenvalue.
    """

    def __init__(self, values: np.ndarray):
        values = np.asarray(values, dtype=float)
        n = values.shape[-1]
        if values.ndim != n + 2 or values.shape[-2] != n:
            raise MetricFormatError(
                f"expected shape (res,)*n + (n, n), got {values.shape}"
            )
        res = values.shape[0]
        if any(s != res for s in values.shape[:n]):
            raise MetricFormatError("grid must have equal resolution per axis")
        flat = values.reshape(-1, n, n)
        if not np.allclose(flat, np.swapaxes(flat, 1, 2), atol=1e-10):
            raise MetricFormatError("metric matrices must be symmetric")
        eigs = np.linalg.eigvalsh(flat)
        if eigs.min() <= 0:
            raise MetricFormatError("metric matrices must be positive definite")
        self._values = values
        self._values.setflags(write=False)
        self._min_eig = float(eigs.min())
        self._max_eig = float(eigs.max())

    @property
    def n(self) -> int:
        return self._values.shape[-1]

    @property
    def resolution(self) -> int:
        return self._values.shape[0]

    @property
    def values(self) -> np.ndarray:
        return self._values

    @property
    def min_eigenvalue(self) -> float:
        return self._min_eig

    @classmethod
    def flat(cls, n: int, resolution: int | None = None) -> "MetricField":
        res = resolution or DEFAULT_RESOLUTION.get(n, 32)
        vals = np.broadcast_to(np.eye(n), (res,) * n + (n, n)).copy()
        return cls(vals)

    @classmethod
    def constant(cls, matrix, resolution: int | None = None) -> "MetricField":
        M = np.asarray(matrix, dtype=float)
        n = M.shape[0]
        res = resolution or DEFAULT_RESOLUTION.get(n, 32)
        vals = np.broadcast_to(M, (res,) * n + (n, n)).copy()
        return cls(vals)

    @classmethod
    def from_function(
        cls, fn: Callable[[np.ndarray], np.ndarray], n: int, resolution: int | None = None
    ) -> "MetricField":
        """Sample fn (mapping (K, n) points to (K, n, n) matrices) on the grid."""
        res = resolution or DEFAULT_RESOLUTION.get(n, 32)
        pts = grid_points(n, res)
        vals = fn(pts).reshape((res,) * n + (n, n))
        return cls(vals)

    @classmethod
    def conformal(
        cls, factor: Callable[[np.ndarray], np.ndarray], n: int, resolution: int | None = None
    ) -> "MetricField":
        """Metric factor(x) * identity; factor maps (K, n) to (K,)."""

        def fn(pts):
            f = np.asarray(factor(pts), dtype=float)
            return f[:, None, None] * np.eye(n)

        return cls.from_function(fn, n, resolution)

    def eval_many(self, pts: np.ndarray) -> np.ndarray:
        """Multilinear interpolation at points in [0, 1)^n; returns (K, n, n)."""
        pts = np.asarray(pts, dtype=float)
        n, res = self.n, self.resolution
        u = np.mod(pts, 1.0) * res
        i0 = np.floor(u).astype(np.int64)
        frac = u - i0
        out = np.zeros((pts.shape[0], n, n))
        for corner in range(1 << n):
            offs = np.array([(corner >> a) & 1 for a in range(n)])
            w = np.ones(pts.shape[0])
            for a in range(n):
                w *= frac[:, a] if offs[a] else (1.0 - frac[:, a])
            idx = tuple(((i0[:, a] + offs[a]) % res) for a in range(n))
            out += w[:, None, None] * self._values[idx]
        return out

    def diameter_estimate(self) -> float:
        """Grid distance from the origin to the far corner of the cell; an
        upper proxy for the diameter of the fundamental domain."""
        center = np.full(self.n, 0.5)
        return grid_geodesic_distance(self, np.zeros(self.n), center)

    def save(self, path, body_format: str = "npy") -> None:
        path = Path(path)
        body_name = path.stem + "_body." + ("npy" if body_format == "npy" else "csv")
        header = {
            "n": self.n,
            "resolution": self.resolution,
            "interpolation": "multilinear",
            "body": body_name,
            "body_format": body_format,
        }
        flat = self._values.reshape(-1, self.n * self.n)
        if body_format == "npy":
            np.save(path.parent / body_name, flat)
        elif body_format == "csv":
            np.savetxt(path.parent / body_name, flat, delimiter=",")
        else:
            raise MetricFormatError(f"unknown body format {body_format!r}")
        path.write_text(json.dumps(header, sort_keys=True, indent=2))

    @classmethod
    def load(cls, path) -> "MetricField":
        path = Path(path)
        try:
            header = json.loads(path.read_text())
            n = int(header["n"])
            res = int(header["resolution"])
            if header.get("interpolation", "multilinear") != "multilinear":
                raise MetricFormatError("only multilinear interpolation supported")
            body = path.parent / header["body"]
            fmt = header.get("body_format", "npy")
            if fmt == "npy":
                flat = np.load(body)
            else:
                flat = np.loadtxt(body, delimiter=",", ndmin=2)
        except (KeyError, ValueError, OSError) as exc:
            raise MetricFormatError(f"bad metric file {path}: {exc}") from exc
        if flat.shape != (res**n, n * n):
            raise MetricFormatError(
                f"body shape {flat.shape} does not match header (n={n}, res={res})"
            )
        return cls(flat.reshape((res,) * n + (n, n)))


def grid_points(n: int, res: int) -> np.ndarray:
    idx = np.indices((res,) * n).reshape(n, -1).T
    return idx / res


@dataclass(frozen=True)
class OneForm:
    """Closed one-form: a cohomology class plus d(potential).

    Closedness holds by representation, so no discrete exterior-derivative
    check is needed.  potential is sampled on the same grid convention as
    MetricField (may be None for a constant form).
    """

    cohomology_class: np.ndarray
    potential: np.ndarray | None = None

    def __post_init__(self):
        c = np.asarray(self.cohomology_class, dtype=float)
        object.__setattr__(self, "cohomology_class", c)
        if self.potential is not None:
            p = np.asarray(self.potential, dtype=float)
            if p.ndim != c.size:
                raise ValueError("potential grid rank must equal dimension")
            object.__setattr__(self, "potential", p - p.mean())

    def covector_grid(self, res: int) -> np.ndarray:
        """Covector field on the (res,)*n grid: class + central-difference
        gradient of the potential."""
        n = self.cohomology_class.size
        out = np.broadcast_to(
            self.cohomology_class, (res,) * n + (n,)
        ).copy()
        if self.potential is not None:
            if self.potential.shape[0] != res:
                raise ValueError("potential resolution mismatch")
            for a in range(n):
                up = np.roll(self.potential, -1, axis=a)
                dn = np.roll(self.potential, 1, axis=a)
                out[..., a] += (up - dn) * res / 2.0
        return out


def lift_unwrap(points) -> np.ndarray:
    """Continuous lift of a time-ordered torus sample sequence to R^n.

    Consecutive samples must differ by less than 0.5 per coordinate mod 1;
    larger jumps make the minimal representative ambiguous and raise
    StepTooLarge (the trajectory is undersampled).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    diffs = np.diff(pts, axis=0)
    wrapped = (diffs + 0.5) % 1.0 - 0.5
    if np.any(np.abs(wrapped) >= 0.5 - 1e-12):
        raise StepTooLarge("consecutive samples differ by >= 0.5 mod 1")
    out = np.empty_like(pts)
    out[0] = pts[0]
    out[1:] = pts[0] + np.cumsum(wrapped, axis=0)
    return out


def _window_for(a: np.ndarray, b: np.ndarray, res: int, pad: int):
    lo = np.floor(np.minimum(a, b) * res).astype(np.int64) - pad
    hi = np.ceil(np.maximum(a, b) * res).astype(np.int64) + pad
    span = (hi - lo) / res
    if np.any(span > MAX_WINDOW_DOMAINS):
        raise OutOfWindow(
            f"window spans {span.max():.1f} fundamental domains (max {MAX_WINDOW_DOMAINS})"
        )
    return lo, tuple(int(s) for s in hi - lo + 1)


def _node_of(point: np.ndarray, lo: np.ndarray, shape, res: int) -> int:
    idx = np.rint(point * res).astype(np.int64) - lo
    idx = np.clip(idx, 0, np.array(shape) - 1)
    return int(np.ravel_multi_index(tuple(idx), shape))


def grid_geodesic_distance(metric: MetricField, a, b, moves=None) -> float:
    """Shortest-path length between lifted points on the windowed grid graph.

    Endpoints snap to nearest grid nodes.  The value overestimates the true
    distance by O(grid step + residual anisotropy of the move stencil).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    res = metric.resolution
    if moves is None:
        moves = grid_paths.default_moves(metric.n)
    lo, shape = _window_for(a, b, res, pad=res // 2)
    nbr, wts, coords = grid_paths.build_window_graph(metric, lo, shape, moves)
    src = _node_of(a, lo, shape, res)
    dst = _node_of(b, lo, shape, res)
    if src == dst:
        return 0.0
    wmin = math.sqrt(metric.min_eigenvalue)
    H = grid_paths.euclid_heuristic(coords, coords[dst], wmin)
    d, _ = grid_paths.search(nbr, wts, H, [src], dst)
    return d


def leaf_to_leaf_distance(metric: MetricField, axis: int, a: float, b: float) -> float:
    """Grid distance between the leaves x_axis = a and x_axis = b (lift)."""
    res = metric.resolution
    n = metric.n
    lo = np.zeros(n, dtype=np.int64)
    hi = np.full(n, res, dtype=np.int64)
    lo[axis] = math.floor(min(a, b) * res) - 1
    hi[axis] = math.ceil(max(a, b) * res) + 1
    if (hi[axis] - lo[axis]) / res > MAX_WINDOW_DOMAINS:
        raise OutOfWindow("leaf separation exceeds the lift window")
    shape = tuple(int(s) for s in hi - lo + 1)
    moves = grid_paths.default_moves(n)
    nbr, wts, coords = grid_paths.build_window_graph(metric, lo, shape, moves)
    src_mask = np.abs(coords[:, axis] - a) <= 0.5 / res + 1e-12
    dst_mask = np.abs(coords[:, axis] - b) <= 0.5 / res + 1e-12
    sources = np.nonzero(src_mask)[0]
    H = np.zeros(coords.shape[0])
    _, dist = grid_paths.search(nbr, wts, H, sources, dst=-1)
    return float(dist[dst_mask].min())


def stable_norm_integer(metric: MetricField, k, moves=None) -> float:
    """Grid estimate of the stable norm of an integer class: the length of
    the shortest closed grid loop winding by k.

    The class is reduced to its primitive part (the stable norm is exactly
    homogeneous, and the minimal loop of a multiple is the repeated loop),
    and the base point is minimized over a slab transverse to the class,
    which every winding loop must cross.
    """
    k = homology.as_int_class(k)
    if np.all(k == 0):
        raise ValueError("stable norm of the zero class is trivially 0")
    g = int(np.gcd.reduce(np.abs(k[k != 0])))
    k0 = (k // g).astype(np.int64)
    n = metric.n
    res = metric.resolution
    if moves is None:
        moves = grid_paths.default_moves(n)
    slab = int(np.abs(moves).max())
    jstar = int(np.argmax(np.abs(k0)))
    pad = res if n == 2 else res // 2

    lo = np.full(n, -pad, dtype=np.int64)
    shape = []
    starts = []
    for i in range(n):
        extent = slab if i == jstar else res
        neg = max(0, -int(k0[i])) * res
        pos = max(0, int(k0[i])) * res
        starts.append(pad + neg)
        shape.append(pad + neg + extent + pos + pad)
    shape = tuple(shape)
    if max(shape) / res > MAX_WINDOW_DOMAINS + 2:
        raise OutOfWindow(f"class {k.tolist()} needs too wide a lift window")

    nbr, wts, coords = grid_paths.build_window_graph(metric, lo, shape, moves)
    wmin = math.sqrt(metric.min_eigenvalue)

    ranges = []
    for i in range(n):
        extent = slab if i == jstar else res
        ranges.append(np.arange(starts[i], starts[i] + extent))
    mesh = np.meshgrid(*ranges, indexing="ij")
    src_idx = np.stack([m.ravel() for m in mesh], axis=1)
    offset = k0 * res
    straight = wmin * float(np.linalg.norm(k0))
    best = np.inf
    for s in src_idx:
        if straight >= best * (1.0 - 1e-12):
            break
        src = int(np.ravel_multi_index(tuple(s), shape))
        dst = int(np.ravel_multi_index(tuple(s + offset), shape))
        H = grid_paths.euclid_heuristic(coords, coords[dst], wmin)
        d, _ = grid_paths.search(
            nbr, wts, H, [src], dst, cutoff=best * (1.0 - 1e-12)
        )
        if d < best:
            best = d
    return g * float(best)


def stable_norm_real(metric: MetricField, v, denominator_bound: int = 8) -> float:
    """Stable norm of a real class via rational directions: minimize
    stable_norm_integer(round(q v)) / q over denominators q <= bound."""
    v = homology.as_real_vector(v)
    if np.allclose(v, 0.0):
        raise ValueError("stable norm of the zero vector is trivially 0")
    best = np.inf
    for q in range(1, denominator_bound + 1):
        k = np.rint(q * v).astype(np.int64)
        if np.all(k == 0):
            continue
        if np.max(np.abs(k / q - v)) > 0.5 / q:
            continue
        try:
            val = stable_norm_integer(metric, k) / q
        except OutOfWindow:
            continue
        best = min(best, val)
    if not np.isfinite(best):
        raise OutOfWindow("no admissible rational direction within the window")
    return float(best)


def stable_norm_model(metric: MetricField, denominator_bound: int = 8) -> homology.NormModel:
    """Metric-backed NormModel; integer inputs take the loop estimator."""

    def ev(v):
        k = np.rint(v)
        if np.allclose(v, k, atol=1e-12) and np.any(k != 0):
            return stable_norm_integer(metric, k.astype(np.int64))
        return stable_norm_real(metric, v, denominator_bound)

    return homology.NormModel("stable", ev)


def geodesible_metric(base: MetricField, field: np.ndarray, beta: OneForm) -> MetricField:
    """Metric that makes the integral curves of the field geodesics and the
    kernel of the one-form orthogonal to the field.

    At each node the tangent space splits as <X> (+) ker(beta); the output is
    the sum of the base metric pushed through the two projections.  Requires
    beta(X) != 0 at every node, otherwise DegeneratePairing.
    """
    n = base.n
    res = base.resolution
    X = np.asarray(field, dtype=float)
    if X.shape != (res,) * n + (n,):
        raise ValueError(f"field must have shape {(res,)*n + (n,)}, got {X.shape}")
    B = beta.covector_grid(res)
    Xf = X.reshape(-1, n)
    Bf = B.reshape(-1, n)
    pair = np.einsum("ki,ki->k", Bf, Xf)
    if np.any(np.abs(pair) < 1e-12):
        bad = int(np.argmin(np.abs(pair)))
        raise DegeneratePairing(
            f"beta(X) vanishes near node {np.unravel_index(bad, (res,)*n)}"
        )
    # P_H = X b^T / (b . X): range <X>, kernel ker(beta)
    PH = np.einsum("ki,kj->kij", Xf, Bf) / pair[:, None, None]
    PV = np.eye(n)[None] - PH
    Gf = base.values.reshape(-1, n, n)
    out = np.einsum("kai,kab,kbj->kij", PH, Gf, PH) + np.einsum(
        "kai,kab,kbj->kij", PV, Gf, PV
    )
    out = 0.5 * (out + np.swapaxes(out, 1, 2))
    return MetricField(out.reshape((res,) * n + (n, n)))


def maupertuis_metric(g: MetricField, potential: np.ndarray, e: float) -> MetricField:
    """Kinetic rescaling (e + V(x)) * g whose geodesics trace the energy-e
    orbits of the mechanical system with kinetic metric g and potential -V
    in the Hamiltonian (H = |p|^2/2 - V).

    Requires e + V > 0 on the grid (SubcriticalEnergy otherwise).
    """
    V = np.asarray(potential, dtype=float)
    n = g.n
    res = g.resolution
    if V.shape != (res,) * n:
        raise ValueError(f"potential must have shape {(res,) * n}, got {V.shape}")
    factor = e + V
    if np.any(factor <= 0):
        raise SubcriticalEnergy(f"e + V reaches {factor.min():.3g} <= 0")
    return MetricField(factor[..., None, None] * g.values)


# --- rational approximation of a closed one-form by a fibration ------------


@dataclass(frozen=True)
class TischlerFibration:
    """Rational approximation p/q of a one-form class, with the induced
    fibration x -> <p_primitive, x> mod 1 over the circle."""

    p: np.ndarray
    q: int
    primitive_p: np.ndarray
    error: float
    dirichlet_bound: int

    def __call__(self, x) -> float:
        return float(np.dot(self.primitive_p, np.asarray(x, dtype=float)) % 1.0)


def tischler_fibration(c, eps: float) -> TischlerFibration:
    """Smallest denominator q with ||c - p/q||_inf <= eps (exhaustive search,
    guaranteed to stop at the Dirichlet bound ceil(eps^-n))."""
    c = homology.as_real_vector(c)
    if np.allclose(c, 0.0):
        raise ValueError("the class of a nonsingular one-form cannot vanish")
    n = c.size
    if eps < 0:
        raise ValueError("eps must be nonnegative")
    if eps == 0:
        bound = 10**6
        tol = 1e-9
    else:
        bound = int(math.ceil(eps ** (-n)))
        tol = eps
    for q in range(1, bound + 1):
        p = np.rint(q * c).astype(np.int64)
        if np.all(p == 0):
            continue
        err = float(np.max(np.abs(c - p / q)))
        if err <= tol + 1e-15:
            g = int(np.gcd.reduce(np.abs(p[p != 0])))
            return TischlerFibration(
                p=p, q=q, primitive_p=p // g, error=err, dirichlet_bound=bound
            )
    raise ValueError("no rational approximation found below the Dirichlet bound")


def _unimodular_completion(p: np.ndarray) -> np.ndarray:
    """Integer matrix V with |det V| = 1 and p @ V = (1, 0, ..., 0).

    Columns 2..n of V form a lattice basis of the sublattice orthogonal to p;
    requires gcd(p) = 1.
    """
    p = [int(x) for x in p]
    n = len(p)
    V = np.eye(n, dtype=np.int64)
    row = list(p)
    # sweep gcds into position 0 by pairwise column operations
    for j in range(1, n):
        a, b = row[0], row[j]
        if b == 0:
            continue
        g, u, v = _ext_gcd(a, b)
        # new col0 = u*col0 + v*colj ; new colj = -(b/g)*col0 + (a/g)*colj
        c0 = u * V[:, 0] + v * V[:, j]
        cj = (-b // g) * V[:, 0] + (a // g) * V[:, j]
        V[:, 0], V[:, j] = c0, cj
        row[0], row[j] = g, 0
    if abs(row[0]) != 1:
        raise ValueError("covector must be primitive (gcd 1)")
    if row[0] == -1:
        V[:, 0] = -V[:, 0]
    return V


def _ext_gcd(a: int, b: int) -> tuple[int, int, int]:
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r != 0:
        qt = old_r // r
        old_r, r = r, old_r - qt * r
        old_s, s = s, old_s - qt * s
        old_t, t = t, old_t - qt * t
    if old_r < 0:
        old_r, old_s, old_t = -old_r, -old_s, -old_t
    return old_r, old_s, old_t


def verify_fiber_torus(fib: TischlerFibration, samples: int = 256) -> dict:
    """Check that the level sets of the fibration are connected (n-1)-tori.

    Certificates: the fibration covector is primitive and completes to a
    unimodular basis whose last n-1 columns generate the orthogonal lattice
    (connectedness), and the loops along those columns stay on the zero level
    set with unit winding count when sampled on the grid.
    """
    p = np.asarray(fib.primitive_p, dtype=np.int64)
    n = p.size
    V = _unimodular_completion(p)
    windings = [V[:, j].copy() for j in range(1, n)]
    det = int(round(float(np.linalg.det(V.astype(float)))))
    max_level_dev = 0.0
    for w in windings:
        ts = np.arange(samples) / samples
        vals = (np.outer(ts, w) @ p).astype(float) % 1.0
        dev = np.minimum(vals, 1.0 - vals).max()
        max_level_dev = max(max_level_dev, float(dev))
    rank = np.linalg.matrix_rank(np.stack(windings).astype(float))
    ok = (
        abs(det) == 1
        and rank == n - 1
        and all(int(np.dot(p, w)) == 0 for w in windings)
        and max_level_dev < 1e-12
    )
    return {
        "connected": abs(det) == 1,
        "winding_vectors": [w.tolist() for w in windings],
        "winding_rank": int(rank),
        "on_level_set_deviation": max_level_dev,
        "verified": bool(ok),
    }
