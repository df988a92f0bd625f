"""Iteration loops for the built-in lifted torus maps.

Map codes (params is a length-4 float array (a, b, c, d)):

    0  translation by (a, b)
    1  additive shear  (x + a + c sin 2 pi y,  y + b + d sin 2 pi x)
    2  composed shear  V o H with H: x += a + c sin 2 pi y,
                               then V: y += b + d sin 2 pi x'
       (compositions of one-variable shears are homeomorphisms for any
       amplitude, unlike the additive form)

The displacement-average sweep over a full grid of initial points is the hot
loop behind rotation-set estimation; the numba path parallelizes over grid
points and the numpy path iterates steps on whole point arrays.
"""

from __future__ import annotations

import math

import numpy as np

from .._backend import USE_NUMBA, njit, prange

TWO_PI = 2.0 * math.pi


@njit(cache=True, inline="always")
def _apply(code, params, x, y):
    a, b, c, d = params[0], params[1], params[2], params[3]
    if code == 0:
        return x + a, y + b
    if code == 1:
        return x + a + c * math.sin(TWO_PI * y), y + b + d * math.sin(TWO_PI * x)
    xn = x + a + c * math.sin(TWO_PI * y)
    return xn, y + b + d * math.sin(TWO_PI * xn)


@njit(cache=True, parallel=True)
def displacement_averages(code, params, grid, n_iter):  # pragma: no cover
    """(F^n(x) - x)/n over a grid x grid lattice of starts; (grid^2, 2)."""
    out = np.empty((grid * grid, 2))
    for k in prange(grid * grid):
        i = k // grid
        j = k % grid
        x0 = i / grid
        y0 = j / grid
        x, y = x0, y0
        for _ in range(n_iter):
            x, y = _apply(code, params, x, y)
        out[k, 0] = (x - x0) / n_iter
        out[k, 1] = (y - y0) / n_iter
    return out


@njit(cache=True)
def iterate_sequence(code, params, x0, y0, n):  # pragma: no cover
    """All lift iterates (n+1, 2) starting from (x0, y0)."""
    out = np.empty((n + 1, 2))
    x, y = x0, y0
    out[0, 0] = x
    out[0, 1] = y
    for i in range(1, n + 1):
        x, y = _apply(code, params, x, y)
        out[i, 0] = x
        out[i, 1] = y
    return out


if not USE_NUMBA:

    def _apply_vec(code, params, x, y):
        a, b, c, d = params
        if code == 0:
            return x + a, y + b
        if code == 1:
            return x + a + c * np.sin(TWO_PI * y), y + b + d * np.sin(TWO_PI * x)
        xn = x + a + c * np.sin(TWO_PI * y)
        return xn, y + b + d * np.sin(TWO_PI * xn)

    def displacement_averages(code, params, grid, n_iter):  # noqa: F811
        ii, jj = np.meshgrid(np.arange(grid), np.arange(grid), indexing="ij")
        x0 = (ii / grid).ravel()
        y0 = (jj / grid).ravel()
        x, y = x0.copy(), y0.copy()
        for _ in range(n_iter):
            x, y = _apply_vec(code, params, x, y)
        return np.stack([(x - x0) / n_iter, (y - y0) / n_iter], axis=1)

    def iterate_sequence(code, params, x0, y0, n):  # noqa: F811
        out = np.empty((n + 1, 2))
        x, y = float(x0), float(y0)
        out[0] = x, y
        for i in range(1, n + 1):
            x, y = _apply_vec(code, params, np.float64(x), np.float64(y))
            out[i] = x, y
        return out
