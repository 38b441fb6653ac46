"""Distance functionals between two solutions and their stability ratio."""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

from .errors import DisjointDomains, TimeGridMismatch
from .regularize import smoothstep
from .state import FluidState, Grid, sample_fields

A_ONE, A_ZERO = 0.8, 0.9
ABSOLUTE_FLOOR = 1e-14


def ancillary_a(mu, nu):
    """Degree-0 homogeneous cutoff: 1 for |nu| <= 0.8 mu, 0 for |nu| >= 0.9 mu, a(0, 0) = 0."""
    mu = np.asarray(mu, float)
    nu = np.asarray(nu, float)
    if np.any(mu < 0):
        raise ValueError("mu must be nonnegative")
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(mu > 0, np.abs(nu) / np.where(mu > 0, mu, 1.0), np.inf)
    out = np.where(t <= A_ONE, 1.0, np.where(t >= A_ZERO, 0.0, 1.0 - smoothstep((t - A_ONE) / (A_ZERO - A_ONE))))
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class DiffReport:
    d_full: float
    d_reduced: float
    common_domain: tuple[float, float]
    mu_min: float


def common_grid(s1: FluidState, s2: FluidState) -> Grid:
    left = max(s1.grid.left, s2.grid.left)
    right = min(s1.grid.right, s2.grid.right)
    if not right > left:
        raise DisjointDomains("the two gas domains do not overlap")
    n = max(s1.grid.n, s2.grid.n)
    return Grid.uniform(left, right, n)


def _integrands(s1: FluidState, s2: FluidState, grid: Grid):
    x = grid.nodes
    q1, v1, k1 = sample_fields(s1, x)
    q2, v2, k2 = sample_fields(s2, x)
    alpha, beta = s1.params.alpha, s1.params.beta
    mu, nu = q1 + q2, q1 - q2
    w, z, kappa = v1 - v2, k1 - k2, k1 + k2
    pos = mu > 0
    safe = np.where(pos, mu, 1.0)
    full = np.where(pos, safe ** (alpha - 1) * (nu * nu + safe / kappa * (beta * w * w + z * z)), 0.0)
    return mu, nu, full


def distance_functionals(s1: FluidState, s2: FluidState) -> DiffReport:
    """Full and reduced distance on a shared uniform grid over the common domain."""
    grid = common_grid(s1, s2)
    mu, nu, full = _integrands(s1, s2, grid)
    reduced = ancillary_a(mu, nu) * full
    x = grid.nodes
    inner = mu[1:-1]
    return DiffReport(float(np.trapezoid(full, x)), float(np.trapezoid(reduced, x)),
                      (grid.left, grid.right), float(inner.min()) if inner.size else 0.0)


@dataclass
class StabilityReport:
    d0: float
    d_sup: float
    ratio: float | None
    mode: str
    per_time: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps({"d0": self.d0, "d_sup": self.d_sup, "ratio": self.ratio, "mode": self.mode,
                           "per_time": self.per_time}, indent=1)

    def to_csv(self) -> str:
        lines = ["t,d_full,d_reduced"]
        lines += [f"{r['t']!r},{r['d_full']!r},{r['d_reduced']!r}" for r in self.per_time]
        return "\n".join(lines) + "\n"


def stability_ratio(traj1, traj2, floor: float = ABSOLUTE_FLOOR) -> StabilityReport:
    a, b = traj1.snapshots, traj2.snapshots
    ta = np.array([s.t for s in a])
    tb = np.array([s.t for s in b])
    if ta.shape != tb.shape or np.any(np.abs(ta - tb) > 1e-12 * max(1.0, float(np.max(np.abs(ta))))):
        raise TimeGridMismatch("trajectories do not share time stamps")
    rows = []
    for s1, s2 in zip(a, b):
        rep = distance_functionals(s1, s2)
        rows.append({"t": s1.t, "d_full": rep.d_full, "d_reduced": rep.d_reduced})
    d = np.array([r["d_full"] for r in rows])
    d0, dsup = float(d[0]), float(np.max(d))
    s0 = a[0]
    scale = float(np.trapezoid((2 * s0.q) ** (s0.params.alpha + 1), s0.x))
    if d0 < floor * scale:
        return StabilityReport(d0, dsup, None, "AbsoluteMode", rows)
    return StabilityReport(d0, dsup, dsup / d0, "Relative", rows)
