"""First homology of the n-torus: classes, norm models, cones of given slope.

Homology classes are plain numpy vectors: integer classes live in Z^n
(coordinates in the standard basis), real classes in R^n.  A cone with axis h
and slope A, relative to a direct-sum splitting R^n = <h> (+) G, is the set of
vectors t*h + w with t >= 0 and ||w|| <= A * ||t*h||.  The norm is pluggable
(Euclidean, a constant quadratic form, or a metric-backed stable norm) so the
same cone logic serves flat and curved settings.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np


class SingularBasis(ValueError):
    """Axis plus complement do not span R^n."""


class _NotProper:
    """Result marker: no proper cone with the given axis contains the set."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self):
        return "NotProper"

    def __bool__(self):
        return False


NOT_PROPER = _NotProper()

_DECOMP_RTOL = 1e-12


def as_int_class(k) -> np.ndarray:
    """Coerce to an exact integer homology class."""
    arr = np.asarray(k)
    out = np.rint(arr).astype(np.int64)
    if not np.allclose(arr, out, rtol=0, atol=1e-9):
        raise ValueError(f"not an integer class: {k!r}")
    return out


def as_real_vector(v) -> np.ndarray:
    arr = np.asarray(v, dtype=float)
    if arr.ndim != 1 or arr.size < 1:
        raise ValueError("homology vector must be a 1-d array")
    if not np.all(np.isfinite(arr)):
        raise ValueError("homology vector has non-finite entries")
    return arr


@dataclass(frozen=True)
class NormModel:
    """Positively homogeneous norm evaluator on real homology vectors.

    kind is one of "euclidean", "quadratic" (constant SPD matrix, the exact
    stable norm of a constant-coefficient metric) or "stable" (grid metric
    backed, see torus_geometry.stable_norm_model).
    """

    kind: str
    evaluator: Callable[[np.ndarray], float] = field(compare=False)

    def __call__(self, v) -> float:
        return float(self.evaluator(as_real_vector(v)))


def euclidean_norm() -> NormModel:
    return NormModel("euclidean", lambda v: float(np.linalg.norm(v)))


def quadratic_norm(matrix) -> NormModel:
    """Norm sqrt(v' M v) of a constant symmetric positive definite M."""
    M = np.asarray(matrix, dtype=float)
    if M.ndim != 2 or M.shape[0] != M.shape[1]:
        raise ValueError("quadratic norm needs a square matrix")
    if not np.allclose(M, M.T, atol=1e-12):
        raise ValueError("quadratic norm matrix must be symmetric")
    if np.linalg.eigvalsh(M).min() <= 0:
        raise ValueError("quadratic norm matrix must be positive definite")

    def ev(v):
        return float(np.sqrt(v @ M @ v))

    return NormModel("quadratic", ev)


def coordinate_complement(axis) -> np.ndarray:
    """Default complement of <axis>: the coordinate hyperplane dropping the
    largest-magnitude component of the axis.  Columns are basis vectors."""
    h = as_real_vector(axis)
    j = int(np.argmax(np.abs(h)))
    if h[j] == 0.0:
        raise ValueError("cone axis must be nonzero")
    n = h.size
    cols = [i for i in range(n) if i != j]
    G = np.zeros((n, n - 1))
    for c, i in enumerate(cols):
        G[i, c] = 1.0
    return G


@dataclass(frozen=True)
class ConeSpec:
    """Cone of slope `slope` with axis `axis` in the splitting <axis> (+) G.

    complement holds the chosen G as an (n, n-1) column matrix.  The cone
    depends on this choice; reports always echo it.
    """

    axis: np.ndarray
    complement: np.ndarray
    slope: float
    norm: NormModel

    def __post_init__(self):
        h = as_real_vector(self.axis)
        G = np.asarray(self.complement, dtype=float)
        if np.allclose(h, 0.0):
            raise ValueError("cone axis must be nonzero")
        if G.shape != (h.size, h.size - 1):
            raise ValueError("complement must be an (n, n-1) column matrix")
        if self.slope < 0:
            raise ValueError("cone slope must be nonnegative")
        object.__setattr__(self, "axis", h)
        object.__setattr__(self, "complement", G)

    @property
    def basis(self) -> np.ndarray:
        return np.column_stack([self.axis, self.complement])


def cone(axis, slope, norm=None, complement=None) -> ConeSpec:
    h = as_real_vector(axis)
    if norm is None:
        norm = euclidean_norm()
    if complement is None:
        complement = coordinate_complement(h)
    return ConeSpec(h, np.asarray(complement, dtype=float), float(slope), norm)


def _solve_split(v: np.ndarray, basis: np.ndarray) -> np.ndarray:
    n = basis.shape[0]
    if np.linalg.matrix_rank(basis, tol=1e-10) < n:
        raise SingularBasis("axis and complement basis are rank deficient")
    return np.linalg.solve(basis, v)


def decompose(v, cone: ConeSpec) -> tuple[float, np.ndarray]:
    """Split v = t*axis + w with w in span(complement).

    The residual of the recomposition is checked against a 1e-12 relative
    bound; a violation indicates an ill-conditioned complement.
    """
    vv = as_real_vector(v)
    coeffs = _solve_split(vv, cone.basis)
    t = float(coeffs[0])
    w = cone.complement @ coeffs[1:]
    recomposed = t * cone.axis + w
    scale = max(1.0, float(np.linalg.norm(vv)))
    if np.linalg.norm(recomposed - vv) > _DECOMP_RTOL * scale * 100:
        raise SingularBasis("decomposition residual too large (ill conditioned)")
    return t, w


def cone_contains(v, cone_spec: ConeSpec, rtol: float = 1e-9) -> bool:
    """Membership of v in the cone.

    v = 0 counts as inside (t = 0, w = 0 is in the defining union).  A vector
    with t <= 0 and v != 0 is outside; t = 0 with w != 0 has infinite slope
    and is outside every finite-slope cone.
    """
    vv = as_real_vector(v)
    if np.allclose(vv, 0.0, atol=1e-15):
        return True
    t, w = decompose(vv, cone_spec)
    norm = cone_spec.norm
    wn = norm(w) if np.any(w != 0.0) else 0.0
    if t <= 0.0:
        # t == 0 with w == 0 is the zero vector, handled above
        return False
    axis_part = norm(t * cone_spec.axis)
    return wn <= cone_spec.slope * axis_part * (1.0 + rtol) + 1e-15


def minimal_slope(axis, norm: NormModel, vectors: Sequence, complement=None):
    """Smallest slope A such that every vector lies in the cone with the
    given axis, or NOT_PROPER when some vector has t <= 0 (then no proper
    cone with this axis contains the set)."""
    vecs = [as_real_vector(v) for v in vectors]
    if not vecs:
        raise ValueError("minimal_slope needs at least one vector")
    spec = cone(axis, 0.0, norm=norm, complement=complement)
    worst = 0.0
    for v in vecs:
        if np.allclose(v, 0.0, atol=1e-15):
            continue
        t, w = decompose(v, spec)
        wn = spec.norm(w) if np.any(w != 0.0) else 0.0
        if t <= 0.0 or (t < 1e-14 and wn > 0.0):
            return NOT_PROPER
        if wn == 0.0:
            continue
        worst = max(worst, wn / spec.norm(t * spec.axis))
    return worst
