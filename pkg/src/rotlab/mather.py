"""Minimal average actions: the effective Lagrangian beta on homology via
direct minimization over periodic curves, its convex conjugate alpha on
cohomology via adaptive grid search, and a numeric differentiability probe.

beta(h) is approximated from above: a closed curve with winding w over period
T carries an occupation measure of rotation vector w/T, so minimizing the
discrete average action over curves with w/T = h (h rational with small
denominator; other h evaluate at their best rational approximant) bounds the
measure-theoretic minimum.  For the flat and mechanical test models the gap
vanishes where analytically forced, which is what the suite asserts.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np
from scipy import optimize

from .hamiltonian import (
    CircleFieldModel,
    CosinePotential,
    MechanicalModel,
    ZeroPotential,
)

TWO_PI = 2.0 * math.pi


class NotConverged(RuntimeError):
    pass


class BoxTooSmall(ValueError):
    """Conjugacy argmax landed on the search box boundary."""


@dataclass(frozen=True)
class PeriodicCurve:
    """Closed curve with winding: nodes in R^n, node_N = node_0 + winding."""

    winding: np.ndarray
    nodes: np.ndarray
    period: float

    def __post_init__(self):
        if self.nodes.shape[0] < 16:
            raise ValueError("need at least 16 nodes")
        if self.period <= 0:
            raise ValueError("period must be positive")


@dataclass(frozen=True)
class BetaEvaluation:
    h: np.ndarray
    value: float
    optimizer: PeriodicCurve
    converged: bool
    rational_h: np.ndarray


# --- Lagrangian closed forms ---------------------------------------------------


def _lagrangian_ops(model):
    """Vectorized (value, grad_x, grad_v) of the model's Lagrangian.

    Mechanical: L = v'Mv/2 + V(x) (the Fenchel transform of p'Minv p/2 - V).
    Circle field: L = |v - X(x)|^2 / 2.
    """
    if isinstance(model, MechanicalModel):
        M = np.linalg.inv(model.minv)
        pot = model.potential

        if isinstance(pot, CosinePotential):
            amp, axis = pot.amplitude, pot.axis

            def v_many(x):
                return amp * np.cos(TWO_PI * x[:, axis])

            def g_many(x):
                g = np.zeros_like(x)
                g[:, axis] = -amp * TWO_PI * np.sin(TWO_PI * x[:, axis])
                return g

        elif isinstance(pot, ZeroPotential):
            def v_many(x):
                return np.zeros(x.shape[0])

            def g_many(x):
                return np.zeros_like(x)

        else:
            def v_many(x):
                return np.array([pot.value(xi) for xi in x])

            def g_many(x):
                return np.stack([pot.gradient(xi) for xi in x])

        def value(x, v):
            return 0.5 * np.einsum("ki,ij,kj->k", v, M, v) + v_many(x)

        def grad_x(x, v):
            return g_many(x)

        def grad_v(x, v):
            return v @ M

        return value, grad_x, grad_v

    if isinstance(model, CircleFieldModel):

        def field(x):
            return np.stack(
                [np.cos(TWO_PI * x[:, 0]), np.sin(TWO_PI * x[:, 0])], axis=1
            )

        def value(x, v):
            d = v - field(x)
            return 0.5 * (d**2).sum(axis=1)

        def grad_x(x, v):
            d = v - field(x)
            out = np.zeros_like(x)
            out[:, 0] = -TWO_PI * (
                -np.sin(TWO_PI * x[:, 0]) * d[:, 0]
                + np.cos(TWO_PI * x[:, 0]) * d[:, 1]
            )
            return out

        def grad_v(x, v):
            return v - field(x)

        return value, grad_x, grad_v

    raise TypeError(f"no Lagrangian closed form for {type(model).__name__}")


def rational_direction(h, q_max: int) -> tuple[np.ndarray, int]:
    """Best winding/denominator pair (w, q), q <= q_max, minimizing
    ||h - w/q||_inf (exact when h has a small common denominator)."""
    h = np.asarray(h, dtype=float)
    best = None
    for q in range(1, q_max + 1):
        w = np.rint(q * h).astype(np.int64)
        err = float(np.max(np.abs(h - w / q)))
        if best is None or err < best[0] - 1e-15:
            best = (err, w, q)
        if err < 1e-12:
            break
    return best[1], best[2]


def _discrete_action(model_ops, Z, winding, T):
    """Average action of the closed polygon Z (N, n) with the given winding,
    midpoint rule for the configuration term; returns (value, grad)."""
    value_fn, gx_fn, gv_fn = model_ops
    N, n = Z.shape
    dt = T / N
    Znext = np.vstack([Z[1:], Z[0] + winding])
    v = (Znext - Z) / dt
    mid = 0.5 * (Z + Znext)
    val = float(np.sum(value_fn(mid, v)) * dt / T)
    gx = gx_fn(mid, v) * dt
    gv = gv_fn(mid, v)
    grad = np.zeros_like(Z)
    # d/dZ[i] of segment i contributions (v = (Z[i+1]-Z[i])/dt, mid)
    grad += 0.5 * gx - gv
    # and of segment i-1 (Z[i] enters as the + end)
    grad += np.vstack([0.5 * gx[-1:] + gv[-1:], 0.5 * gx[:-1] + gv[:-1]])
    return val, grad / T


def _newton_polish(objective, x0, iters: int = 3, fd: float = 1e-6):
    """Drive the gradient to stationarity by Newton steps on grad = 0,
    with the Hessian from central differences of the analytic gradient.
    Quasi-Newton line searches stall at the float noise floor of the
    objective; solving the stationarity system directly does not."""
    x = x0.copy()
    _, g = objective(x)
    best_x, best_g = x.copy(), float(np.max(np.abs(g)))
    m = x.size
    for _ in range(iters):
        if best_g < 1e-13:
            break
        J = np.empty((m, m))
        for j in range(m):
            e = np.zeros(m)
            e[j] = fd
            _, gp = objective(x + e)
            _, gm = objective(x - e)
            J[:, j] = (gp - gm) / (2 * fd)
        try:
            step = np.linalg.solve(0.5 * (J + J.T), g)
        except np.linalg.LinAlgError:
            break
        x = x - step
        _, g = objective(x)
        gn = float(np.max(np.abs(g)))
        if gn >= best_g:
            break
        best_x, best_g = x.copy(), gn
    return best_x


def beta(
    model,
    h,
    nodes: int = 64,
    q_max: int = 32,
    scan: int = 8,
    gtol: float = 1e-9,
) -> BetaEvaluation:
    """Minimal average action over closed curves with rotation vector h.

    h is replaced by its best rational approximant w/q (q <= q_max); the
    curve winds by w over period q, so its occupation measure has rotation
    vector exactly w/q.  Initialization scans straight-line curves over a
    coarse grid of base points and descends with L-BFGS; `converged` records
    whether the projected gradient dropped below 1e-8.
    """
    h = np.asarray(h, dtype=float)
    n = h.size
    ops = _lagrangian_ops(model)
    w, q = rational_direction(h, q_max)
    T = float(q)
    N = max(32, nodes)

    ts = np.arange(N)[:, None] / N
    base_grid = np.stack(
        np.meshgrid(*([np.arange(scan) / scan] * n), indexing="ij"), axis=-1
    ).reshape(-1, n)
    best_val, best_base = np.inf, base_grid[0]
    for b in base_grid:
        Z = b[None, :] + ts * w
        val, _ = _discrete_action(ops, Z, w, T)
        if val < best_val:
            best_val, best_base = val, b
    Z0 = best_base[None, :] + ts * w

    def objective(flat):
        val, grad = _discrete_action(ops, flat.reshape(N, n), w, T)
        return val, grad.ravel()

    res = optimize.minimize(
        objective,
        Z0.ravel(),
        jac=True,
        method="L-BFGS-B",
        options={"maxiter": 2000, "gtol": gtol, "ftol": 1e-18},
    )
    zcur = _newton_polish(objective, res.x)
    Zopt = zcur.reshape(N, n)
    val, grad = _discrete_action(ops, Zopt, w, T)
    converged = bool(np.max(np.abs(grad)) < 1e-8)
    curve = PeriodicCurve(winding=w, nodes=Zopt, period=T)
    return BetaEvaluation(
        h=h, value=float(val), optimizer=curve, converged=converged,
        rational_h=w / q,
    )


class BetaTable:
    """Caches beta evaluations keyed by the rational direction actually
    evaluated, so nearby queries share work."""

    def __init__(self, model, nodes: int = 48, q_max: int = 32):
        self.model = model
        self.nodes = nodes
        self.q_max = q_max
        self._cache: dict[tuple, BetaEvaluation] = {}

    def __call__(self, h) -> float:
        return self.evaluate(h).value

    def evaluate(self, h) -> BetaEvaluation:
        w, q = rational_direction(np.asarray(h, dtype=float), self.q_max)
        key = (tuple(int(x) for x in w), q)
        ev = self._cache.get(key)
        if ev is None:
            ev = beta(self.model, w / q, nodes=self.nodes, q_max=self.q_max)
            self._cache[key] = ev
        return ev

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            n = len(next(iter(self._cache))[0]) if self._cache else 0
            w.writerow([f"h{i+1}" for i in range(n)] + ["value", "converged"])
            for wk, q in sorted(self._cache):
                ev = self._cache[(wk, q)]
                w.writerow(
                    [repr(x / q) for x in wk]
                    + [repr(ev.value), int(ev.converged)]
                )


def alpha(
    beta_fn,
    c,
    box,
    coarse: int = 9,
    refine: int = 5,
    tol: float = 1e-3,
    max_rounds: int = 12,
) -> float:
    """Convex conjugate alpha(c) = max_h <c, h> - beta(h) by grid refinement.

    beta_fn is a BetaTable (or anything with .evaluate): the pairing always
    uses the rational point the beta value was computed at, so the result is
    a genuine lower envelope of the conjugate over the evaluated lattice.
    The search box must contain the argmax strictly; hitting the boundary
    raises BoxTooSmall.  Refinement stops when the improvement falls below
    tol.
    """
    c = np.asarray(c, dtype=float)
    lo = np.asarray(box[0], dtype=float).copy()
    hi = np.asarray(box[1], dtype=float).copy()
    n = c.size

    def score(h):
        if hasattr(beta_fn, "evaluate"):
            ev = beta_fn.evaluate(h)
            return float(c @ ev.rational_h) - ev.value
        return float(c @ h) - beta_fn(h)

    def grid_best(lo, hi, m):
        axes = [np.linspace(lo[i], hi[i], m) for i in range(n)]
        mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, n)
        vals = np.array([score(h) for h in mesh])
        k = int(np.argmax(vals))
        return mesh[k], float(vals[k]), np.unravel_index(k, (m,) * n)

    hstar, best, idx = grid_best(lo, hi, coarse)
    if any(i == 0 or i == coarse - 1 for i in idx):
        raise BoxTooSmall(f"conjugate argmax at the box boundary for c={c.tolist()}")
    cell = (hi - lo) / (coarse - 1)
    for _ in range(max_rounds):
        lo2 = hstar - cell
        hi2 = hstar + cell
        hstar, new, _ = grid_best(lo2, hi2, refine)
        cell = (hi2 - lo2) / (refine - 1)
        if new - best < tol and np.max(cell) < 0.05:
            best = max(best, new)
            break
        best = max(best, new)
    return best


class AlphaEvaluator:
    """alpha(c) backed by a shared beta cache over a fixed box.

    The value is the conjugate over every rotation vector evaluated so far:
    the refined local search is swept against the whole shared cache, so
    alpha(c) + beta(h) >= <c, h> holds for all cached h by construction.
    """

    def __init__(self, beta_table: BetaTable, box, tol: float = 1e-3):
        self.beta_table = beta_table
        self.box = box
        self.tol = tol
        self._cache: dict[tuple, float] = {}

    def _cache_sweep(self, c) -> float:
        best = -np.inf
        for (wk, q), ev in self.beta_table._cache.items():
            h = np.array(wk) / q
            best = max(best, float(np.dot(c, h)) - ev.value)
        return best

    def __call__(self, c) -> float:
        key = tuple(np.round(np.asarray(c, dtype=float), 12))
        if key not in self._cache:
            searched = alpha(self.beta_table, key, self.box, tol=self.tol)
            self._cache[key] = max(searched, self._cache_sweep(np.asarray(key)))
        return self._cache[key]

    def refresh(self) -> None:
        """Re-sweep every cached value against the grown beta cache (the
        lower envelope only ever moves up, toward the exact conjugate)."""
        for key in list(self._cache):
            self._cache[key] = max(
                self._cache[key], self._cache_sweep(np.asarray(key))
            )

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            n = len(next(iter(self._cache))) if self._cache else 0
            w.writerow([f"c{i+1}" for i in range(n)] + ["value"])
            for key in sorted(self._cache):
                w.writerow([repr(float(x)) for x in key] + [repr(self._cache[key])])


def alpha_subdifferential_width(alpha_fn, c, directions=None, delta: float = 1e-2) -> float:
    """One-sided slope gap of alpha at c: max over directions u of
    (alpha(c + delta u) + alpha(c - delta u) - 2 alpha(c)) / delta.

    Tends to 0 with delta for differentiable alpha; at a kink it measures
    the jump of the directional derivative (|c1| at 0 gives 2).
    """
    c = np.asarray(c, dtype=float)
    n = c.size
    if directions is None:
        directions = np.eye(n)
    a0 = alpha_fn(c)
    width = 0.0
    for u in np.atleast_2d(directions):
        u = np.asarray(u, dtype=float)
        gap = (alpha_fn(c + delta * u) + alpha_fn(c - delta * u) - 2 * a0) / delta
        width = max(width, float(gap))
    return width
