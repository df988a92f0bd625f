"""Flows on the torus with exact lift tracking.

A flow here is any object with a dimension, an ``advance(x0, t)`` returning
the lifted position, and a ``trajectory(x0, T, nsamples)`` returning
PathSamples.  Linear flows advance in closed form; vector-field flows
integrate with fixed-step RK4.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class PathSamples:
    """Positions of a lifted path at increasing sample times."""

    times: np.ndarray
    states_x: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "times", np.asarray(self.times, dtype=float))
        object.__setattr__(self, "states_x", np.asarray(self.states_x, dtype=float))
        if np.any(np.diff(self.times) < 0):
            raise ValueError("times must be nondecreasing")

    @property
    def horizon(self) -> float:
        return float(self.times[-1] - self.times[0])

    def displacement(self) -> np.ndarray:
        return self.states_x[-1] - self.states_x[0]

    def position_at(self, t: float) -> np.ndarray:
        i = int(np.argmin(np.abs(self.times - t)))
        return self.states_x[i]


class LinearFlow:
    """x(t) = x0 + t v, exactly."""

    def __init__(self, velocity):
        self.velocity = np.asarray(velocity, dtype=float)
        self.dim = self.velocity.size

    def advance(self, x0, t: float) -> np.ndarray:
        return np.asarray(x0, dtype=float) + t * self.velocity

    def trajectory(self, x0, T: float, nsamples: int = 256) -> PathSamples:
        ts = np.linspace(0.0, T, nsamples)
        xs = np.asarray(x0, dtype=float)[None, :] + ts[:, None] * self.velocity
        return PathSamples(ts, xs)


class CallableFlow:
    """Flow defined by a closed-form advance map (x0, t) -> x(t)."""

    def __init__(self, advance_fn: Callable, dim: int):
        self._advance = advance_fn
        self.dim = dim

    def advance(self, x0, t: float) -> np.ndarray:
        return np.asarray(self._advance(np.asarray(x0, dtype=float), float(t)), dtype=float)

    def trajectory(self, x0, T: float, nsamples: int = 256) -> PathSamples:
        ts = np.linspace(0.0, T, nsamples)
        xs = np.stack([self.advance(x0, t) for t in ts])
        return PathSamples(ts, xs)


class VectorFieldFlow:
    """Fixed-step RK4 integration of dx/dt = X(x) (X periodic in x)."""

    def __init__(self, field: Callable, dim: int, step: float = 1e-3):
        self.field = field
        self.dim = dim
        self.step = step

    def _march(self, x0, T, record_ts=None):
        x = np.asarray(x0, dtype=float).copy()
        nsteps = max(1, int(round(T / self.step)))
        dt = T / nsteps
        out = [] if record_ts is not None else None
        rec = None
        if record_ts is not None:
            rec = np.minimum(np.round(np.asarray(record_ts) / dt).astype(int), nsteps)
            ptr = 0
            while ptr < len(rec) and rec[ptr] == 0:
                out.append(x.copy())
                ptr += 1
        for i in range(1, nsteps + 1):
            k1 = self.field(x)
            k2 = self.field(x + 0.5 * dt * k1)
            k3 = self.field(x + 0.5 * dt * k2)
            k4 = self.field(x + dt * k3)
            x = x + dt / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
            if rec is not None:
                while ptr < len(rec) and rec[ptr] == i:
                    out.append(x.copy())
                    ptr += 1
        if rec is not None:
            return out
        return x

    def advance(self, x0, t: float) -> np.ndarray:
        if t == 0.0:
            return np.asarray(x0, dtype=float).copy()
        return self._march(x0, t)

    def trajectory(self, x0, T: float, nsamples: int = 256) -> PathSamples:
        ts = np.linspace(0.0, T, nsamples)
        xs = np.stack(self._march(x0, T, record_ts=ts))
        return PathSamples(ts, xs)


def first_leaf_return(flow, x0, covector, increment: float = 1.0,
                      t_guess: float = 1.0, tol: float = 1e-10,
                      t_max: float = 1e4) -> float:
    """First time the pairing <covector, x(t) - x0> reaches the increment.

    Coarse forward march followed by bisection to the requested tolerance.
    Requires eventual monotone crossing (transverse flows).
    """
    x0 = np.asarray(x0, dtype=float)
    cov = np.asarray(covector, dtype=float)

    def g(t):
        return float(cov @ (flow.advance(x0, t) - x0)) - increment

    t_hi = t_guess
    while g(t_hi) < 0:
        t_hi *= 2.0
        if t_hi > t_max:
            raise ValueError("no leaf return found before t_max")
    t_lo = 0.0 if t_hi == t_guess else t_hi / 2.0
    for _ in range(200):
        mid = 0.5 * (t_lo + t_hi)
        if t_hi - t_lo < tol:
            break
        if g(mid) < 0:
            t_lo = mid
        else:
            t_hi = mid
    return 0.5 * (t_lo + t_hi)
