"""Moving-domain state: parameters, grids, fluid snapshots, boundary location and scaling."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
from scipy.interpolate import CubicHermiteSpline, CubicSpline
from scipy.optimize import brentq

from .errors import (
    DisconnectedSupport,
    InsufficientResolution,
    NoVacuumBoundary,
    OutOfDomain,
)

CLAMP_TOL = 1e-10
ENDPOINT_TOL = 1e-9


def _frozen(a, dtype=float) -> np.ndarray:
    arr = np.array(a, dtype=dtype, copy=True)
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class Params:
    """Adiabatic data. ``beta`` sets the adiabatic index 1 + beta."""

    beta: float = 1.0
    eps_star: float = 0.01
    dim: int = 1

    def __post_init__(self):
        if not np.isfinite(self.beta) or self.beta <= 0:
            raise ValueError(f"beta must be positive, got {self.beta!r}")
        if not (0 < self.eps_star < 0.5):
            raise ValueError(f"eps_star must lie in (0, 1/2), got {self.eps_star!r}")
        if self.dim != 1:
            raise ValueError("only dim = 1 is supported")

    @property
    def alpha(self) -> float:
        return 1.0 / self.beta

    @property
    def kappa0(self) -> float:
        return 0.5 + self.dim / 2 + 1.0 / (2 * self.beta)


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing node positions; the endpoints are the domain boundary."""

    nodes: np.ndarray

    def __post_init__(self):
        x = _frozen(self.nodes)
        if x.ndim != 1 or x.size < 8:
            raise ValueError("a grid needs at least 8 nodes")
        if not np.all(np.isfinite(x)) or np.any(np.diff(x) <= 0):
            raise ValueError("grid nodes must be finite and strictly increasing")
        object.__setattr__(self, "nodes", x)
        object.__setattr__(self, "_cache", {})

    @classmethod
    def uniform(cls, left: float, right: float, n: int) -> "Grid":
        x = np.linspace(left, right, n)
        x[0], x[-1] = left, right
        return cls(x)

    @property
    def n(self) -> int:
        return self.nodes.size

    @property
    def left(self) -> float:
        return float(self.nodes[0])

    @property
    def right(self) -> float:
        return float(self.nodes[-1])

    @property
    def length(self) -> float:
        return self.right - self.left

    @property
    def spacing(self) -> np.ndarray:
        return np.diff(self.nodes)

    def __eq__(self, other) -> bool:
        return isinstance(other, Grid) and np.array_equal(self.nodes, other.nodes)

    def __hash__(self):
        return hash(self.nodes.tobytes())


@dataclass(frozen=True, eq=False)
class FluidState:
    """Immutable snapshot of (q, v, sigma) on a grid spanning the gas domain."""

    grid: Grid
    q: np.ndarray
    v: np.ndarray
    sigma: np.ndarray
    params: Params = field(default_factory=Params)
    t: float = 0.0

    def __post_init__(self):
        n = self.grid.n
        q, v, s = _frozen(self.q), _frozen(self.v), _frozen(self.sigma)
        for name, arr in (("q", q), ("v", v), ("sigma", s)):
            if arr.shape != (n,):
                raise ValueError(f"{name} has shape {arr.shape}, expected ({n},)")
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} contains non-finite values")
        if q[0] != 0.0 or q[-1] != 0.0:
            raise ValueError("q must vanish exactly at both endpoints")
        if np.any(q[1:-1] <= 0):
            raise ValueError("q must be strictly positive at interior nodes")
        if np.any(s <= 0):
            raise ValueError("sigma must be positive")
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "v", v)
        object.__setattr__(self, "sigma", s)
        object.__setattr__(self, "t", float(self.t))

    @property
    def x(self) -> np.ndarray:
        return self.grid.nodes

    @property
    def domain(self) -> tuple[float, float]:
        return self.grid.left, self.grid.right

    def replace(self, **changes) -> "FluidState":
        kw = dict(grid=self.grid, q=self.q, v=self.v, sigma=self.sigma,
                  params=self.params, t=self.t)
        kw.update(changes)
        return FluidState(**kw)

    def sound_speed(self) -> np.ndarray:
        return np.sqrt(self.params.beta * self.sigma * self.q)

    def __eq__(self, other) -> bool:
        if not isinstance(other, FluidState):
            return NotImplemented
        return (self.grid == other.grid and self.params == other.params and self.t == other.t
                and np.array_equal(self.q, other.q) and np.array_equal(self.v, other.v)
                and np.array_equal(self.sigma, other.sigma))

    __hash__ = None


@dataclass(frozen=True)
class NonDegeneracy:
    c_left: float
    c_right: float

    @property
    def c(self) -> float:
        return min(self.c_left, self.c_right)

    def below(self, threshold: float) -> bool:
        return self.c < threshold


# ---------------------------------------------------------------------------
# interpolation


def monotone_cubic(x: np.ndarray, y: np.ndarray) -> CubicHermiteSpline:
    """Cubic Hermite interpolant with spline slopes limited by the Hyman filter.

    Fourth-order accurate away from extrema, exact on cubics where the filter is
    inactive, and monotone on every interval where the data are monotone.
    """
    x = np.asarray(x, float)
    y = np.asarray(y, float)
    secant = np.diff(y) / np.diff(x)
    d = CubicSpline(x, y, bc_type="not-a-knot")(x, 1)
    out = np.zeros_like(d)

    # interior nodes
    sl, sr = secant[:-1], secant[1:]
    same = sl * sr > 0
    bound = 3.0 * np.minimum(np.abs(sl), np.abs(sr))
    di = d[1:-1]
    mono = np.where(np.sign(di) == np.sign(sl), np.sign(sl) * np.minimum(np.abs(di), bound), 0.0)
    out[1:-1] = np.where(same, mono, 0.0)

    for i, s in ((0, secant[0]), (-1, secant[-1])):
        if s == 0 or np.sign(d[i]) != np.sign(s):
            out[i] = 0.0
        else:
            out[i] = np.sign(s) * min(abs(d[i]), 3.0 * abs(s))
    return CubicHermiteSpline(x, y, out)


def _pin_q(q: np.ndarray, clamp_tol: float) -> np.ndarray:
    q = np.array(q, dtype=float)
    q[0] = q[-1] = 0.0
    scale = float(np.max(np.abs(q))) if q.size else 0.0
    inner = q[1:-1]
    if np.any(inner < -clamp_tol * scale):
        raise InsufficientResolution("q has interior negative values beyond the clamp tolerance")
    inner[inner < 0] = 0.0
    if np.any(inner <= 0):
        raise InsufficientResolution("q vanishes at an interior node after remapping")
    return q


def resample(state: FluidState, new_grid: Grid, clamp_tol: float = CLAMP_TOL) -> FluidState:
    """Interpolate ``state`` onto ``new_grid`` spanning the same domain."""
    old = state.grid
    tol = ENDPOINT_TOL * max(old.length, 1e-300)
    if new_grid.left < old.left - tol or new_grid.right > old.right + tol:
        raise OutOfDomain("target grid extends beyond the gas domain")
    if abs(new_grid.left - old.left) > tol or abs(new_grid.right - old.right) > tol:
        raise ValueError("target grid must span the same domain")
    if new_grid == old:
        return state
    xs = np.clip(new_grid.nodes, old.left, old.right)
    q = monotone_cubic(old.nodes, state.q)(xs)
    v = monotone_cubic(old.nodes, state.v)(xs)
    s = monotone_cubic(old.nodes, state.sigma)(xs)
    return FluidState(new_grid, _pin_q(q, clamp_tol), v, s, state.params, state.t)


def sample_fields(state: FluidState, points: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Evaluate (q, v, sigma) at points inside the domain; q is zero-extended outside."""
    pts = np.asarray(points, float)
    inside = (pts >= state.grid.left) & (pts <= state.grid.right)
    xs = np.clip(pts, state.grid.left, state.grid.right)
    q = np.where(inside, monotone_cubic(state.x, state.q)(xs), 0.0)
    q = np.maximum(q, 0.0)
    v = monotone_cubic(state.x, state.v)(xs)
    s = monotone_cubic(state.x, state.sigma)(xs)
    return q, v, s


# ---------------------------------------------------------------------------
# boundary location


def _positive_blocks(q: np.ndarray) -> list[tuple[int, int]]:
    pos = q > 0
    blocks, start = [], None
    for i, p in enumerate(pos):
        if p and start is None:
            start = i
        elif not p and start is not None:
            blocks.append((start, i - 1))
            start = None
    if start is not None:
        blocks.append((start, len(q) - 1))
    return blocks


def _crossing(x: np.ndarray, q: np.ndarray, i: int, method: str) -> float:
    """Root of the interpolant of q in [x[i], x[i+1]] where q changes sign."""
    if q[i] == 0.0:
        return float(x[i])
    if q[i + 1] == 0.0:
        return float(x[i + 1])
    if method == "linear":
        return float(x[i] - q[i] * (x[i + 1] - x[i]) / (q[i + 1] - q[i]))
    lo = max(0, min(i - 1, len(x) - 4))
    idx = np.arange(lo, min(lo + 4, len(x)))
    xc = 0.5 * (x[i] + x[i + 1])
    hs = x[i + 1] - x[i]
    coeffs = np.polyfit((x[idx] - xc) / hs, q[idx], len(idx) - 1)
    poly = np.poly1d(coeffs)
    a, b = -0.5, 0.5
    if poly(a) * poly(b) > 0:
        return float(x[i] - q[i] * (x[i + 1] - x[i]) / (q[i + 1] - q[i]))
    root = brentq(poly, a, b, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    return float(xc + root * hs)


def locate_boundary(q_samples: Sequence[float], grid: Grid, method: str = "cubic") -> tuple[float, float]:
    """Zero crossings bracketing the positive block of ``q_samples``.

    A side where the positive block reaches the end of the grid reports that grid
    end. At least one sign change is required.
    """
    q = np.asarray(q_samples, float)
    x = grid.nodes
    if q.shape != x.shape:
        raise ValueError("samples and grid differ in length")
    blocks = _positive_blocks(q)
    if not blocks:
        raise NoVacuumBoundary("q has no positive values")
    if len(blocks) > 1:
        raise DisconnectedSupport(f"found {len(blocks)} positive blocks")
    i0, i1 = blocks[0]
    if i0 == 0 and i1 == len(q) - 1:
        raise NoVacuumBoundary("q has no sign change on the grid")
    left = float(x[0]) if i0 == 0 else _crossing(x, q, i0 - 1, method)
    right = float(x[-1]) if i1 == len(q) - 1 else _crossing(x, q, i1, method)
    return left, right


# ---------------------------------------------------------------------------
# symmetry and diagnostics


def scale_state(state: FluidState, tau: float) -> FluidState:
    """Apply the scaling symmetry (tau^-2 q, tau^-1 v, sigma) at (tau t, tau^2 x)."""
    if not tau > 0:
        raise ValueError("tau must be positive")
    if tau == 1:
        return state
    grid = Grid(state.x / tau**2)
    return FluidState(grid, state.q / tau**2, state.v / tau, state.sigma, state.params, state.t / tau)


def _one_sided_slope(x: np.ndarray, f: np.ndarray) -> float:
    """Second-order one-sided derivative at x[0] from the first three nodes."""
    h1, h2 = x[1] - x[0], x[2] - x[1]
    w0 = -(2 * h1 + h2) / (h1 * (h1 + h2))
    w1 = (h1 + h2) / (h1 * h2)
    w2 = -h1 / (h2 * (h1 + h2))
    return float(w0 * f[0] + w1 * f[1] + w2 * f[2])


def nondegeneracy(state: FluidState) -> NonDegeneracy:
    x, q = state.x, state.q
    if x.size < 3:
        raise InsufficientResolution("need 3 nodes per endpoint")
    cl = abs(_one_sided_slope(x[:3], q[:3]))
    cr = abs(_one_sided_slope(-x[::-1][:3], q[::-1][:3]))
    return NonDegeneracy(cl, cr)


# ---------------------------------------------------------------------------
# snapshot JSON


def _fmt(v: float) -> str:
    return format(float(v), ".17g")


def _fmt_list(a: np.ndarray) -> str:
    return "[" + ", ".join(_fmt(v) for v in a) + "]"


def snapshot_to_json(state: FluidState) -> str:
    """One-line JSON with 17 significant digits, so parsing restores every bit."""
    parts = [
        f'"t": {_fmt(state.t)}',
        f'"beta": {_fmt(state.params.beta)}',
        f'"nodes": {_fmt_list(state.x)}',
        f'"q": {_fmt_list(state.q)}',
        f'"v": {_fmt_list(state.v)}',
        f'"sigma": {_fmt_list(state.sigma)}',
    ]
    return "{" + ", ".join(parts) + "}"


def snapshot_from_json(text: str, eps_star: float = 0.01) -> FluidState:
    d = json.loads(text)
    missing = {"t", "beta", "nodes", "q", "v", "sigma"} - set(d)
    if missing:
        raise ValueError(f"snapshot lacks fields {sorted(missing)}")
    params = Params(beta=float(d["beta"]), eps_star=eps_star)
    return FluidState(Grid(d["nodes"]), d["q"], d["v"], d["sigma"], params, d["t"])
