"""Rotation vectors of lifted trajectories, closed quasi-orbits, accumulation
clusters and the empirical audit of the slope-3 cone bound.

A trajectory's rotation estimate is its lift displacement divided by the
horizon; the closing correction needed to make the path a cycle is bounded by
the diameter of a fundamental domain and is absorbed into the reported
Cauchy gap over dyadic sub-horizons.  Quasi-orbits close a trajectory segment
with a short geodesic back to the base point, which pins down an integer
homology class.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np

from .homology import NormModel, as_real_vector
from .torus_geometry import MetricField, grid_geodesic_distance


@dataclass(frozen=True)
class RotationEstimate:
    value: np.ndarray
    horizon: float
    cauchy_gap: float


def rotation_vector(traj, window: int = 4) -> RotationEstimate:
    """Displacement-over-time estimate with a dyadic Cauchy gap.

    The gap is the max deviation of the estimates at horizons T/2^j,
    j < window, from the full-horizon estimate; it absorbs both slow
    convergence and the O(D/T) closing correction.
    """
    T = traj.horizon
    if T <= 0:
        raise ValueError("trajectory horizon must be positive")
    t0 = traj.times[0]
    x0 = traj.states_x[0]
    value = (traj.states_x[-1] - x0) / T
    gap = 0.0
    for j in range(1, window):
        i = int(np.argmin(np.abs(traj.times - (t0 + T / 2**j))))
        ti = traj.times[i] - t0
        if ti <= 0:
            continue
        est = (traj.states_x[i] - x0) / ti
        gap = max(gap, float(np.max(np.abs(est - value))))
    return RotationEstimate(value=value, horizon=T, cauchy_gap=gap)


@dataclass(frozen=True)
class QuasiOrbitRecord:
    base: np.ndarray
    horizon: float
    orbit_displacement: np.ndarray
    closing_class: np.ndarray
    total_class: np.ndarray
    closing_length: float
    ambiguous: bool


def _closing_candidates(delta: np.ndarray) -> np.ndarray:
    n = delta.size
    base = np.rint(delta).astype(np.int64)
    offs = np.indices((3,) * n).reshape(n, -1).T - 1
    return base[None, :] + offs


def quasi_orbit_class(traj, metric: MetricField | None, T: float) -> QuasiOrbitRecord:
    """Integer class of the trajectory over [0, T] closed by a short geodesic.

    The closing curve runs from the endpoint back to the nearest lattice
    translate of the base point; its lattice choice is the class correction.
    With T = 0 the record is degenerate (zero class, zero length).  The
    record is flagged ambiguous when the closing length reaches half the
    injectivity estimate of the metric.
    """
    x0 = traj.states_x[0]
    if T == 0:
        z = np.zeros(x0.size, dtype=np.int64)
        return QuasiOrbitRecord(
            base=np.mod(x0, 1.0), horizon=0.0, orbit_displacement=np.zeros(x0.size),
            closing_class=z, total_class=z.copy(), closing_length=0.0, ambiguous=False,
        )
    if T > traj.horizon + 1e-9:
        raise ValueError("T exceeds the trajectory horizon")
    xT = traj.position_at(T)
    delta = xT - x0
    cands = _closing_candidates(delta)
    targets = x0[None, :] + cands
    euclid = np.linalg.norm(targets - xT[None, :], axis=1)
    order = np.argsort(euclid, kind="stable")
    if metric is None:
        best = int(order[0])
        lengths = euclid
        inj = 1.0
    else:
        # grid distances only for the few nearest candidates
        lengths = np.full(len(cands), np.inf)
        for i in order[:3]:
            lengths[i] = grid_geodesic_distance(metric, xT, targets[i])
        best = int(np.argmin(lengths))
        inj = float(np.sqrt(metric.min_eigenvalue))
    total = cands[best]
    closing_len = float(lengths[best])
    rounded = np.rint(delta).astype(np.int64)
    return QuasiOrbitRecord(
        base=np.mod(x0, 1.0),
        horizon=float(T),
        orbit_displacement=delta,
        closing_class=total - rounded,
        total_class=total,
        closing_length=closing_len,
        ambiguous=bool(closing_len >= 0.5 * inj),
    )


@dataclass(frozen=True)
class Cluster:
    center: np.ndarray
    radius: float
    count: int


def homology_accumulation(
    trajs, horizons, metric: MetricField | None = None, radius: float = 0.05
) -> list[Cluster]:
    """Single-linkage clusters of the normalized quasi-orbit classes
    total_class / T over all samples and horizons.

    Deterministic: points are processed in input order and clusters are
    sorted by decreasing size, then lexicographic center.
    """
    if not trajs:
        raise ValueError("need at least one trajectory")
    pts = []
    for traj in trajs:
        for T in horizons:
            if T <= 0 or T > traj.horizon + 1e-9:
                continue
            rec = quasi_orbit_class(traj, metric, T)
            pts.append(rec.total_class / T)
    pts = np.asarray(pts)
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
    groups: dict[int, list[int]] = {}
    for i in range(len(pts)):
        groups.setdefault(find(i), []).append(i)
    clusters = []
    for members in groups.values():
        sub = pts[members]
        center = sub.mean(axis=0)
        rad = float(np.max(np.linalg.norm(sub - center, axis=1))) if len(sub) > 1 else 0.0
        clusters.append(Cluster(center=center, radius=rad, count=len(sub)))
    clusters.sort(key=lambda c: (-c.count, tuple(np.round(c.center, 12))))
    return clusters


@dataclass(frozen=True)
class ConeAuditRow:
    m: int
    total_class: np.ndarray
    ratio: float
    bound: float


@dataclass(frozen=True)
class ConeAuditResult:
    rows: list[ConeAuditRow]
    axis_class: np.ndarray
    axis_norm: float
    diameter: float
    return_time: float
    limsup_estimate: float

    def max_excess(self) -> float:
        """Largest ratio - bound over the table (negative when all hold)."""
        return max(r.ratio - r.bound for r in self.rows)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["m", "ratio", "bound", "slack"])
            for r in self.rows:
                w.writerow(
                    [r.m, repr(r.ratio), repr(r.bound), repr(r.bound - r.ratio)]
                )


def cone_bound_audit(
    flow,
    x0,
    h,
    m_max: int,
    norm: NormModel,
    return_time: float | None = None,
    fibration_covector=None,
    diameter: float | None = None,
    metric: MetricField | None = None,
) -> ConeAuditResult:
    """Measure ratio_m = ||class of the m-step quasi-orbit|| / (m ||h||) for
    a flow transverse to a fibration, against the bound 3 + 3 D / (m ||h||).

    The horizon step is the first leaf-return time (computed when not
    given); D is the diameter of a fundamental domain under the norm
    (estimated by the norm of the half-diagonal when not given).
    """
    from .flows import first_leaf_return

    x0 = np.asarray(x0, dtype=float)
    h = np.asarray(h)
    hnorm = norm(as_real_vector(h.astype(float)))
    if fibration_covector is None:
        fibration_covector = h.astype(float)
    if return_time is None:
        return_time = first_leaf_return(flow, x0, fibration_covector)
    if diameter is None:
        diameter = norm(np.full(x0.size, 0.5))
    rows = []
    for m in range(1, m_max + 1):
        xT = flow.advance(x0, m * return_time)
        delta = xT - x0
        total = np.rint(delta).astype(np.int64)
        if metric is not None:
            traj = _TwoPoint(np.stack([x0, xT]), m * return_time)
            total = quasi_orbit_class(traj, metric, m * return_time).total_class
        ratio = norm(total.astype(float)) / (m * hnorm)
        bound = 3.0 + 3.0 * diameter / (m * hnorm)
        rows.append(ConeAuditRow(m=m, total_class=total, ratio=float(ratio), bound=float(bound)))
    lim_lo = max(1, (m_max + 1) // 2)
    limsup = max(r.ratio for r in rows if r.m >= lim_lo)
    return ConeAuditResult(
        rows=rows,
        axis_class=h,
        axis_norm=float(hnorm),
        diameter=float(diameter),
        return_time=float(return_time),
        limsup_estimate=float(limsup),
    )


class _TwoPoint:
    """Minimal trajectory adapter: start and end positions only."""

    def __init__(self, xs, T):
        self.states_x = xs
        self.times = np.array([0.0, T])
        self.horizon = T

    def position_at(self, t):
        return self.states_x[-1] if t > self.horizon / 2 else self.states_x[0]
