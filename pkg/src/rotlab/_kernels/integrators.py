"""Time-stepping loops for the built-in Hamiltonian families.

Coded model families (constant-metric mechanical with a cosine/zero
potential, and the circle-field model H = |p|^2/2 + <p, X(x)> with
X = (cos 2*pi*x1, sin 2*pi*x1)) integrate here; anything with user callables
takes the slower generic path in rotlab.hamiltonian.  States live in the
universal cover, so lifts are exact by construction.  Every kernel tracks the
running max of |H - H0| over all steps, not just stored ones.

Potential codes: 0 none, 1 amp*cos(2*pi*x[axis]).
"""

from __future__ import annotations

import math

import numpy as np

from .._backend import USE_NUMBA, njit, prange

TWO_PI = 2.0 * math.pi


@njit(cache=True)
def _grad_v(x, pot_code, pot_amp, pot_axis, out):
    for i in range(out.shape[0]):
        out[i] = 0.0
    if pot_code == 1:
        out[pot_axis] = -pot_amp * TWO_PI * math.sin(TWO_PI * x[pot_axis])


@njit(cache=True)
def _pot_v(x, pot_code, pot_amp, pot_axis):
    if pot_code == 1:
        return pot_amp * math.cos(TWO_PI * x[pot_axis])
    return 0.0


@njit(cache=True)
def _energy_mech(x, p, minv, pot_code, pot_amp, pot_axis):
    n = x.shape[0]
    t = 0.0
    for i in range(n):
        for j in range(n):
            t += 0.5 * p[i] * minv[i, j] * p[j]
    return t - _pot_v(x, pot_code, pot_amp, pot_axis)


@njit(cache=True)
def verlet_mech(x0, p0, minv, pot_code, pot_amp, pot_axis, dt, nsteps, rec):
    """Velocity Verlet for H = p'Minv p/2 - V(x) (kick-drift-kick).

    rec holds ascending step indices to record (0 = initial state).
    Returns (xs, ps, Hs, max |H - H0|).
    """
    n = x0.shape[0]
    S = rec.shape[0]
    xs = np.empty((S, n))
    ps = np.empty((S, n))
    hs = np.empty(S)
    x = x0.copy()
    p = p0.copy()
    g = np.empty(n)
    h0 = _energy_mech(x, p, minv, pot_code, pot_amp, pot_axis)
    maxdev = 0.0
    ptr = 0
    if S > 0 and rec[0] == 0:
        xs[0] = x
        ps[0] = p
        hs[0] = h0
        ptr = 1
    for step in range(1, nsteps + 1):
        _grad_v(x, pot_code, pot_amp, pot_axis, g)
        for i in range(n):
            p[i] += 0.5 * dt * g[i]
        for i in range(n):
            acc = 0.0
            for j in range(n):
                acc += minv[i, j] * p[j]
            x[i] += dt * acc
        _grad_v(x, pot_code, pot_amp, pot_axis, g)
        for i in range(n):
            p[i] += 0.5 * dt * g[i]
        h = _energy_mech(x, p, minv, pot_code, pot_amp, pot_axis)
        dev = abs(h - h0)
        if dev > maxdev:
            maxdev = dev
        if ptr < S and step == rec[ptr]:
            xs[ptr] = x
            ps[ptr] = p
            hs[ptr] = h
            ptr += 1
    return xs, ps, hs, maxdev


@njit(cache=True)
def _rhs_mech(x, p, minv, pot_code, pot_amp, pot_axis, dx, dp):
    n = x.shape[0]
    for i in range(n):
        acc = 0.0
        for j in range(n):
            acc += minv[i, j] * p[j]
        dx[i] = acc
    _grad_v(x, pot_code, pot_amp, pot_axis, dp)  # dp = +grad V


@njit(cache=True)
def rk4_mech(x0, p0, minv, pot_code, pot_amp, pot_axis, dt, nsteps, rec):
    """Classical RK4 for the same mechanical family (non-symplectic)."""
    n = x0.shape[0]
    S = rec.shape[0]
    xs = np.empty((S, n))
    ps = np.empty((S, n))
    hs = np.empty(S)
    x = x0.copy()
    p = p0.copy()
    k1x = np.empty(n); k1p = np.empty(n)
    k2x = np.empty(n); k2p = np.empty(n)
    k3x = np.empty(n); k3p = np.empty(n)
    k4x = np.empty(n); k4p = np.empty(n)
    tx = np.empty(n); tp = np.empty(n)
    h0 = _energy_mech(x, p, minv, pot_code, pot_amp, pot_axis)
    maxdev = 0.0
    ptr = 0
    if S > 0 and rec[0] == 0:
        xs[0] = x; ps[0] = p; hs[0] = h0
        ptr = 1
    for step in range(1, nsteps + 1):
        _rhs_mech(x, p, minv, pot_code, pot_amp, pot_axis, k1x, k1p)
        for i in range(n):
            tx[i] = x[i] + 0.5 * dt * k1x[i]
            tp[i] = p[i] + 0.5 * dt * k1p[i]
        _rhs_mech(tx, tp, minv, pot_code, pot_amp, pot_axis, k2x, k2p)
        for i in range(n):
            tx[i] = x[i] + 0.5 * dt * k2x[i]
            tp[i] = p[i] + 0.5 * dt * k2p[i]
        _rhs_mech(tx, tp, minv, pot_code, pot_amp, pot_axis, k3x, k3p)
        for i in range(n):
            tx[i] = x[i] + dt * k3x[i]
            tp[i] = p[i] + dt * k3p[i]
        _rhs_mech(tx, tp, minv, pot_code, pot_amp, pot_axis, k4x, k4p)
        for i in range(n):
            x[i] += dt / 6.0 * (k1x[i] + 2 * k2x[i] + 2 * k3x[i] + k4x[i])
            p[i] += dt / 6.0 * (k1p[i] + 2 * k2p[i] + 2 * k3p[i] + k4p[i])
        h = _energy_mech(x, p, minv, pot_code, pot_amp, pot_axis)
        dev = abs(h - h0)
        if dev > maxdev:
            maxdev = dev
        if ptr < S and step == rec[ptr]:
            xs[ptr] = x; ps[ptr] = p; hs[ptr] = h
            ptr += 1
    return xs, ps, hs, maxdev


@njit(cache=True)
def _energy_circle(x, p):
    return 0.5 * (p[0] * p[0] + p[1] * p[1]) + p[0] * math.cos(
        TWO_PI * x[0]
    ) + p[1] * math.sin(TWO_PI * x[0])


@njit(cache=True)
def _rhs_circle(x, p, dx, dp):
    c = math.cos(TWO_PI * x[0])
    s = math.sin(TWO_PI * x[0])
    dx[0] = p[0] + c
    dx[1] = p[1] + s
    dp[0] = -TWO_PI * (-s * p[0] + c * p[1])
    dp[1] = 0.0


@njit(cache=True)
def rk4_circle_field(x0, p0, dt, nsteps, rec):
    """RK4 for H = |p|^2/2 + <p, X(x)>, X = (cos 2 pi x1, sin 2 pi x1)."""
    S = rec.shape[0]
    xs = np.empty((S, 2))
    ps = np.empty((S, 2))
    hs = np.empty(S)
    x = x0.copy()
    p = p0.copy()
    k1x = np.empty(2); k1p = np.empty(2)
    k2x = np.empty(2); k2p = np.empty(2)
    k3x = np.empty(2); k3p = np.empty(2)
    k4x = np.empty(2); k4p = np.empty(2)
    tx = np.empty(2); tp = np.empty(2)
    h0 = _energy_circle(x, p)
    maxdev = 0.0
    ptr = 0
    if S > 0 and rec[0] == 0:
        xs[0] = x; ps[0] = p; hs[0] = h0
        ptr = 1
    for step in range(1, nsteps + 1):
        _rhs_circle(x, p, k1x, k1p)
        for i in range(2):
            tx[i] = x[i] + 0.5 * dt * k1x[i]
            tp[i] = p[i] + 0.5 * dt * k1p[i]
        _rhs_circle(tx, tp, k2x, k2p)
        for i in range(2):
            tx[i] = x[i] + 0.5 * dt * k2x[i]
            tp[i] = p[i] + 0.5 * dt * k2p[i]
        _rhs_circle(tx, tp, k3x, k3p)
        for i in range(2):
            tx[i] = x[i] + dt * k3x[i]
            tp[i] = p[i] + dt * k3p[i]
        _rhs_circle(tx, tp, k4x, k4p)
        for i in range(2):
            x[i] += dt / 6.0 * (k1x[i] + 2 * k2x[i] + 2 * k3x[i] + k4x[i])
            p[i] += dt / 6.0 * (k1p[i] + 2 * k2p[i] + 2 * k3p[i] + k4p[i])
        h = _energy_circle(x, p)
        dev = abs(h - h0)
        if dev > maxdev:
            maxdev = dev
        if ptr < S and step == rec[ptr]:
            xs[ptr] = x; ps[ptr] = p; hs[ptr] = h
            ptr += 1
    return xs, ps, hs, maxdev


@njit(cache=True, parallel=True)
def rk4_circle_field_batch(x0s, p0s, dt, nsteps, rec):
    """Ensemble version of rk4_circle_field, parallel over trajectories."""
    B = x0s.shape[0]
    S = rec.shape[0]
    xs = np.empty((B, S, 2))
    hs = np.empty((B, S))
    dev = np.empty(B)
    for b in prange(B):
        bx, bp, bh, bd = rk4_circle_field(x0s[b], p0s[b], dt, nsteps, rec)
        xs[b] = bx
        hs[b] = bh
        dev[b] = bd
    return xs, hs, dev


if not USE_NUMBA:
    # Vectorized ensemble fallback: the per-trajectory loop above would be
    # quadratically slow in pure Python, so iterate steps on (B, 2) arrays.
    def rk4_circle_field_batch(x0s, p0s, dt, nsteps, rec):  # noqa: F811
        def rhs(x, p):
            c = np.cos(TWO_PI * x[:, 0])
            s = np.sin(TWO_PI * x[:, 0])
            dx = p + np.stack([c, s], axis=1)
            dp = np.zeros_like(p)
            dp[:, 0] = -TWO_PI * (-s * p[:, 0] + c * p[:, 1])
            return dx, dp

        def energy(x, p):
            return 0.5 * (p**2).sum(1) + p[:, 0] * np.cos(
                TWO_PI * x[:, 0]
            ) + p[:, 1] * np.sin(TWO_PI * x[:, 0])

        B = x0s.shape[0]
        S = rec.shape[0]
        xs = np.empty((B, S, 2))
        hs = np.empty((B, S))
        x = x0s.copy()
        p = p0s.copy()
        h0 = energy(x, p)
        maxdev = np.zeros(B)
        ptr = 0
        if S > 0 and rec[0] == 0:
            xs[:, 0] = x
            hs[:, 0] = h0
            ptr = 1
        for step in range(1, nsteps + 1):
            k1x, k1p = rhs(x, p)
            k2x, k2p = rhs(x + 0.5 * dt * k1x, p + 0.5 * dt * k1p)
            k3x, k3p = rhs(x + 0.5 * dt * k2x, p + 0.5 * dt * k2p)
            k4x, k4p = rhs(x + dt * k3x, p + dt * k3p)
            x = x + dt / 6.0 * (k1x + 2 * k2x + 2 * k3x + k4x)
            p = p + dt / 6.0 * (k1p + 2 * k2p + 2 * k3p + k4p)
            maxdev = np.maximum(maxdev, np.abs(energy(x, p) - h0))
            if ptr < S and step == rec[ptr]:
                xs[:, ptr] = x
                hs[:, ptr] = energy(x, p)
                ptr += 1
        return xs, hs, maxdev
