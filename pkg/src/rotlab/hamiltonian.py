"""Convex Hamiltonian models on T*T^n, their Legendre/Fenchel transforms,
and lift-tracked integration of Hamilton's equations.

Built-in families:

* mechanical: H(x, p) = p' G^{-1}(x) p / 2 - V(x) with a constant kinetic
  metric (the sign of V follows the convention in which the corresponding
  Lagrangian is L = |v|^2/2 + V and the strict critical value is -min V);
* circle-field: H(x, p) = |p|^2/2 + <p, X(x)> with the unit field
  X = (cos 2 pi x1, sin 2 pi x1), whose zero section is invariant and carries
  two periodic orbits of opposite homology;
* custom: user-supplied H and analytic gradients (finite differences only
  validate, they never drive the integrator).

Integration happens in the universal cover, so trajectories carry exact
lifts.  Energy drift is monitored at every step and exceeding the configured
budget is an error, not a warning.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np

from ._kernels import integrators as _ik
from .torus_geometry import MetricField

TWO_PI = 2.0 * math.pi


class EnergyDriftExceeded(RuntimeError):
    """Energy wandered beyond the configured budget (step too large?)."""


class NewtonDiverged(RuntimeError):
    """Legendre inversion failed; the model is likely not fiberwise convex."""


# --- potentials -------------------------------------------------------------


@dataclass(frozen=True)
class CosinePotential:
    """V(x) = amplitude * cos(2 pi x[axis])."""

    amplitude: float = 1.0
    axis: int = 0

    def value(self, x: np.ndarray) -> float:
        return self.amplitude * math.cos(TWO_PI * x[self.axis])

    def gradient(self, x: np.ndarray) -> np.ndarray:
        g = np.zeros_like(np.asarray(x, dtype=float))
        g[self.axis] = -self.amplitude * TWO_PI * math.sin(TWO_PI * x[self.axis])
        return g

    def grid(self, n: int, res: int) -> np.ndarray:
        from .torus_geometry import grid_points

        pts = grid_points(n, res)
        return (self.amplitude * np.cos(TWO_PI * pts[:, self.axis])).reshape(
            (res,) * n
        )


@dataclass(frozen=True)
class ZeroPotential:
    def value(self, x) -> float:
        return 0.0

    def gradient(self, x) -> np.ndarray:
        return np.zeros_like(np.asarray(x, dtype=float))

    def grid(self, n: int, res: int) -> np.ndarray:
        return np.zeros((res,) * n)


# --- models -----------------------------------------------------------------


@dataclass(frozen=True)
class MechanicalModel:
    """H = p' Minv p / 2 - V(x) with constant inverse kinetic metric Minv."""

    dim: int
    potential: object = field(default_factory=ZeroPotential)
    metric_inv: np.ndarray | None = None  # None = flat

    kind = "mechanical"

    def __post_init__(self):
        if self.metric_inv is not None:
            M = np.asarray(self.metric_inv, dtype=float)
            if M.shape != (self.dim, self.dim):
                raise ValueError("metric_inv shape mismatch")
            if not np.allclose(M, M.T, atol=1e-12):
                raise ValueError("metric_inv must be symmetric")
            if np.linalg.eigvalsh(M).min() <= 0:
                raise ValueError("metric_inv must be positive definite")
            object.__setattr__(self, "metric_inv", M)

    @property
    def minv(self) -> np.ndarray:
        if self.metric_inv is None:
            return np.eye(self.dim)
        return self.metric_inv

    def H(self, x, p) -> float:
        p = np.asarray(p, dtype=float)
        return float(0.5 * p @ self.minv @ p - self.potential.value(np.asarray(x)))

    def dH(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        return -self.potential.gradient(x), self.minv @ p

    separable = True


@dataclass(frozen=True)
class CircleFieldModel:
    """H = |p|^2/2 + <p, X(x)>, X = (cos 2 pi x1, sin 2 pi x1) on T^2."""

    dim: int = 2
    kind = "mane"
    separable = False

    def field(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        return np.array([math.cos(TWO_PI * x[0]), math.sin(TWO_PI * x[0])])

    def field_grid(self, res: int) -> np.ndarray:
        from .torus_geometry import grid_points

        pts = grid_points(2, res)
        X = np.stack(
            [np.cos(TWO_PI * pts[:, 0]), np.sin(TWO_PI * pts[:, 0])], axis=1
        )
        return X.reshape((res, res, 2))

    def H(self, x, p) -> float:
        p = np.asarray(p, dtype=float)
        return float(0.5 * p @ p + p @ self.field(x))

    def dH(self, x, p):
        x = np.asarray(x, dtype=float)
        p = np.asarray(p, dtype=float)
        c, s = math.cos(TWO_PI * x[0]), math.sin(TWO_PI * x[0])
        dx = np.array([TWO_PI * (-s * p[0] + c * p[1]), 0.0])
        return dx, p + self.field(x)


@dataclass(frozen=True)
class CustomModel:
    """User Hamiltonian with analytic gradients.

    Fiberwise convexity is spot-checked by finite differences at
    construction time via `validate_convexity`.
    """

    dim: int
    H_fn: Callable
    dHdx_fn: Callable
    dHdp_fn: Callable

    kind = "custom"
    separable = False

    def H(self, x, p) -> float:
        return float(self.H_fn(np.asarray(x, float), np.asarray(p, float)))

    def dH(self, x, p):
        x = np.asarray(x, float)
        p = np.asarray(p, float)
        return np.asarray(self.dHdx_fn(x, p), float), np.asarray(
            self.dHdp_fn(x, p), float
        )


def validate_convexity(model, samples: int = 32, seed: int = 0, h: float = 1e-4) -> bool:
    """Spot-check positive definiteness of the momentum Hessian by central
    finite differences on random phase points."""
    rng = np.random.Generator(np.random.Philox(seed))
    n = model.dim
    for _ in range(samples):
        x = rng.random(n)
        p = rng.normal(size=n)
        hess = np.empty((n, n))
        for i in range(n):
            for j in range(n):
                ei = np.zeros(n); ei[i] = h
                ej = np.zeros(n); ej[j] = h
                hess[i, j] = (
                    model.H(x, p + ei + ej)
                    - model.H(x, p + ei - ej)
                    - model.H(x, p - ei + ej)
                    + model.H(x, p - ei - ej)
                ) / (4 * h * h)
        if np.linalg.eigvalsh(0.5 * (hess + hess.T)).min() <= 0:
            return False
    return True


def validate_gradients(model, samples: int = 20, seed: int = 1, h: float = 1e-6,
                       rtol: float = 1e-6) -> float:
    """Max relative deviation between analytic and finite-difference
    gradients on random samples (used as a model self-check)."""
    rng = np.random.Generator(np.random.Philox(seed))
    n = model.dim
    worst = 0.0
    for _ in range(samples):
        x = rng.random(n)
        p = rng.normal(size=n)
        dx, dp = model.dH(x, p)
        for i in range(n):
            e = np.zeros(n); e[i] = h
            fd_x = (model.H(x + e, p) - model.H(x - e, p)) / (2 * h)
            fd_p = (model.H(x, p + e) - model.H(x, p - e)) / (2 * h)
            scale = max(1.0, abs(fd_x), abs(fd_p))
            worst = max(worst, abs(fd_x - dx[i]) / scale, abs(fd_p - dp[i]) / scale)
    return worst


def eval_H(model, x, p) -> float:
    return model.H(x, p)


def grad_H(model, x, p):
    return model.dH(x, p)


# --- Legendre / Fenchel ------------------------------------------------------


def legendre(model, x, v, tol: float = 1e-12, max_iter: int = 100) -> np.ndarray:
    """Momentum p with dH/dp(x, p) = v (damped Newton, finite-difference
    Jacobian for custom models; closed form for built-ins)."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(v, dtype=float)
    if isinstance(model, MechanicalModel):
        return np.linalg.solve(model.minv, v)
    if isinstance(model, CircleFieldModel):
        return v - model.field(x)
    n = model.dim
    p = v.copy()
    fd = 1e-6
    for _ in range(max_iter):
        _, dp = model.dH(x, p)
        r = dp - v
        if np.linalg.norm(r) < tol:
            return p
        J = np.empty((n, n))
        for j in range(n):
            e = np.zeros(n); e[j] = fd
            _, dpp = model.dH(x, p + e)
            _, dpm = model.dH(x, p - e)
            J[:, j] = (dpp - dpm) / (2 * fd)
        try:
            step = np.linalg.solve(J, r)
        except np.linalg.LinAlgError as exc:
            raise NewtonDiverged("singular momentum Hessian") from exc
        lam = 1.0
        base = np.linalg.norm(r)
        while lam > 1e-6:
            _, dpt = model.dH(x, p - lam * step)
            if np.linalg.norm(dpt - v) < base:
                break
            lam *= 0.5
        p = p - lam * step
    raise NewtonDiverged(f"no convergence after {max_iter} iterations")


def fenchel_L(model, x, v) -> tuple[float, np.ndarray]:
    """Lagrangian value L(x, v) = <p, v> - H(x, p) at the Legendre point."""
    p = legendre(model, x, v)
    return float(np.dot(p, v) - model.H(x, p)), p


# --- integration -------------------------------------------------------------


@dataclass(frozen=True)
class IntegratorConfig:
    scheme: str = "verlet"
    step: float = 1e-3
    max_energy_drift: float = 1e-4
    store_every: int | None = None

    def __post_init__(self):
        if self.scheme not in ("verlet", "rk4"):
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not 0 < self.step < 0.1:
            raise ValueError("step must lie in (0, 0.1)")
        if self.max_energy_drift <= 0:
            raise ValueError("max_energy_drift must be positive")


@dataclass(frozen=True)
class LiftedTrajectory:
    """Sampled phase trajectory with exact lift in R^n.

    max_drift is the max of |H - H(0)| over every computed step, also when
    only a decimated subset of states is stored.
    """

    times: np.ndarray
    states_x: np.ndarray
    states_p: np.ndarray
    energies: np.ndarray
    max_drift: float

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("times must be strictly increasing")

    @property
    def horizon(self) -> float:
        return float(self.times[-1] - self.times[0])

    def displacement(self) -> np.ndarray:
        return self.states_x[-1] - self.states_x[0]

    def position_at(self, t: float) -> np.ndarray:
        """Lift position at the stored sample nearest to t."""
        i = int(np.argmin(np.abs(self.times - t)))
        return self.states_x[i]

    def relative_drift(self) -> float:
        scale = max(abs(float(self.energies[0])), 1.0)
        return self.max_drift / scale

    def to_csv(self, path) -> None:
        n = self.states_x.shape[1]
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(
                ["t"]
                + [f"x{i+1}" for i in range(n)]
                + [f"p{i+1}" for i in range(n)]
                + ["H"]
            )
            for i in range(len(self.times)):
                w.writerow(
                    [repr(float(self.times[i]))]
                    + [repr(float(v)) for v in self.states_x[i]]
                    + [repr(float(v)) for v in self.states_p[i]]
                    + [repr(float(self.energies[i]))]
                )


_MAX_STORED = 4097


def _record_indices(nsteps: int, store_every: int | None) -> np.ndarray:
    if store_every is None:
        store_every = max(1, int(math.ceil(nsteps / (_MAX_STORED - 1))))
    rec = list(range(0, nsteps + 1, store_every))
    if rec[-1] != nsteps:
        rec.append(nsteps)
    return np.asarray(rec, dtype=np.int64)


def _pot_code(potential) -> tuple[int, float, int]:
    if isinstance(potential, ZeroPotential):
        return 0, 0.0, 0
    if isinstance(potential, CosinePotential):
        return 1, float(potential.amplitude), int(potential.axis)
    return -1, 0.0, 0


def integrate(model, x0, p0, T: float, config: IntegratorConfig) -> LiftedTrajectory:
    """Integrate Hamilton's equations from (x0, p0) over [0, T].

    Verlet is only admitted for separable mechanical models (constant
    kinetic metric); everything else runs RK4.  Raises EnergyDriftExceeded
    when max |H - H0| / max(|H0|, 1) exceeds the configured budget.
    """
    x0 = np.asarray(x0, dtype=float).copy()
    p0 = np.asarray(p0, dtype=float).copy()
    if T <= 0:
        raise ValueError("horizon T must be positive")
    nsteps = max(1, int(round(T / config.step)))
    dt = T / nsteps
    rec = _record_indices(nsteps, config.store_every)

    if config.scheme == "verlet" and not getattr(model, "separable", False):
        raise ValueError("verlet requires a separable mechanical model")

    code, amp, axis = (-1, 0.0, 0)
    if isinstance(model, MechanicalModel):
        code, amp, axis = _pot_code(model.potential)

    if isinstance(model, MechanicalModel) and code >= 0:
        fn = _ik.verlet_mech if config.scheme == "verlet" else _ik.rk4_mech
        xs, ps, hs, dev = fn(x0, p0, model.minv, code, amp, axis, dt, nsteps, rec)
    elif isinstance(model, CircleFieldModel):
        if config.scheme == "verlet":
            raise ValueError("verlet requires a separable mechanical model")
        xs, ps, hs, dev = _ik.rk4_circle_field(x0, p0, dt, nsteps, rec)
    else:
        xs, ps, hs, dev = _integrate_generic(model, x0, p0, dt, nsteps, rec, config)

    traj = LiftedTrajectory(
        times=rec * dt, states_x=xs, states_p=ps, energies=hs, max_drift=float(dev)
    )
    if traj.relative_drift() > config.max_energy_drift:
        raise EnergyDriftExceeded(
            f"relative drift {traj.relative_drift():.3g} exceeds "
            f"{config.max_energy_drift:.3g}"
        )
    return traj


def _integrate_generic(model, x0, p0, dt, nsteps, rec, config):
    """Plain-Python RK4 for custom models (analytic user gradients)."""
    n = x0.size
    S = rec.shape[0]
    xs = np.empty((S, n)); ps = np.empty((S, n)); hs = np.empty(S)
    x, p = x0.copy(), p0.copy()
    h0 = model.H(x, p)
    maxdev, ptr = 0.0, 0
    if rec[0] == 0:
        xs[0], ps[0], hs[0] = x, p, h0
        ptr = 1

    def rhs(x, p):
        dx, dp = model.dH(x, p)
        return dp, -dx

    for step in range(1, nsteps + 1):
        k1x, k1p = rhs(x, p)
        k2x, k2p = rhs(x + 0.5 * dt * k1x, p + 0.5 * dt * k1p)
        k3x, k3p = rhs(x + 0.5 * dt * k2x, p + 0.5 * dt * k2p)
        k4x, k4p = rhs(x + dt * k3x, p + dt * k3p)
        x = x + dt / 6 * (k1x + 2 * k2x + 2 * k3x + k4x)
        p = p + dt / 6 * (k1p + 2 * k2p + 2 * k3p + k4p)
        h = model.H(x, p)
        maxdev = max(maxdev, abs(h - h0))
        if ptr < S and step == rec[ptr]:
            xs[ptr], ps[ptr], hs[ptr] = x, p, h
            ptr += 1
    return xs, ps, hs, maxdev


def integrate_circle_field_ensemble(
    x0s, p0s, T: float, step: float, record_times=None
):
    """Batch integration of the circle-field model; returns lift samples at
    the requested times (rounded to steps) for every trajectory."""
    x0s = np.atleast_2d(np.asarray(x0s, dtype=float))
    p0s = np.atleast_2d(np.asarray(p0s, dtype=float))
    nsteps = max(1, int(round(T / step)))
    dt = T / nsteps
    if record_times is None:
        record_times = [T]
    rec = sorted({min(nsteps, max(0, int(round(t / dt)))) for t in record_times})
    rec = np.asarray(rec, dtype=np.int64)
    xs, hs, dev = _ik.rk4_circle_field_batch(x0s, p0s, dt, nsteps, rec)
    return rec * dt, xs, hs, dev


# --- critical values and the zero-section catalogue --------------------------


def critical_value_mechanical(potential_grid) -> float:
    """Strict critical value of the mechanical family: -min V on the grid."""
    return float(-np.min(np.asarray(potential_grid, dtype=float)))


@dataclass(frozen=True)
class ZeroSectionOrbit:
    base_x1: float
    homology_class: np.ndarray
    period: float
    residual: float


def mane_zero_section_orbits(step: float = 1e-3) -> list[ZeroSectionOrbit]:
    """The two periodic orbits of the circle-field model on its zero section:
    vertical circles at x1 = 1/4 (class (0, 1)) and x1 = 3/4 (class (0, -1)),
    each of period 1.  Residuals are verified by integration."""
    model = CircleFieldModel()
    out = []
    for x1, cls in ((0.25, (0, 1)), (0.75, (0, -1))):
        cfg = IntegratorConfig(scheme="rk4", step=step, max_energy_drift=1e-6)
        traj = integrate(model, np.array([x1, 0.2]), np.zeros(2), 1.0, cfg)
        disp = traj.displacement()
        residual = float(np.max(np.abs(disp - np.asarray(cls, dtype=float))))
        out.append(ZeroSectionOrbit(x1, np.asarray(cls, dtype=np.int64), 1.0, residual))
    return out


# --- model spec files ---------------------------------------------------------


def load_model(path) -> object:
    """Build a model from a JSON spec:
    {"kind": "mechanical", "dim": 2, "potential": {...}, "metric": file}
    or {"kind": "mane"}.  Metric files hold a constant inverse kinetic
    matrix or a MetricField header (constant fields only)."""
    path = Path(path)
    spec = json.loads(path.read_text())
    kind = spec.get("kind")
    if kind == "mane":
        return CircleFieldModel()
    if kind != "mechanical":
        raise ValueError(f"unknown model kind {kind!r}")
    dim = int(spec.get("dim", 2))
    pot_spec = spec.get("potential")
    if pot_spec is None:
        pot = ZeroPotential()
    else:
        if pot_spec.get("form") != "cosine":
            raise ValueError("only cosine/zero potentials are file-loadable")
        pot = CosinePotential(
            amplitude=float(pot_spec.get("amplitude", 1.0)),
            axis=int(pot_spec.get("axis", 0)),
        )
    minv = None
    metric_file = spec.get("metric")
    if metric_file is not None:
        mf = MetricField.load(path.parent / metric_file)
        flat_vals = mf.values.reshape(-1, mf.n, mf.n)
        if not np.allclose(flat_vals, flat_vals[0], atol=1e-12):
            raise ValueError("mechanical integration requires a constant metric")
        minv = np.linalg.inv(flat_vals[0])
    return MechanicalModel(dim=dim, potential=pot, metric_inv=minv)
