"""Regularized polygonal time stepping, the run loop and linearized propagation."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .calculus import derivative
from .energy import EnergyReport, b_lin, energy_report, linear_energy
from .errors import ContinuationViolation, FoldedFlow, GridMismatch
from .regularize import DEFAULT_MOMENTS, WIDTH_CONST, default_kernels, mollify
from .state import CLAMP_TOL, FluidState, Grid, _pin_q, monotone_cubic, nondegeneracy


@dataclass(frozen=True)
class StepConfig:
    """Step size and regularization settings.

    ``h`` defaults to 0.5 log2(1/eps). ``uniform_count`` of None keeps the node
    count of the incoming state.
    """

    eps: float
    h: float | None = None
    cfl_safety: float = 0.5
    clamp_tol: float = CLAMP_TOL
    uniform_count: int | None = None
    c_min: float = 1e-3
    kernel_moments: int = DEFAULT_MOMENTS
    width_const: float = WIDTH_CONST
    floor_speed: float = 1e-8

    def __post_init__(self):
        if not (self.eps >= 0 and math.isfinite(self.eps)):
            raise ValueError("eps must be a finite nonnegative number")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError("cfl_safety must lie in (0, 1]")
        if self.uniform_count is not None and self.uniform_count < 8:
            raise ValueError("uniform_count must be at least 8")
        if self.h is None and self.eps > 0:
            object.__setattr__(self, "h", max(0.0, 0.5 * math.log2(1.0 / self.eps)))


def cfl_timestep(state: FluidState, safety: float = 0.5, floor_speed: float = 1e-8) -> float:
    speed = float(np.max(np.abs(state.v)) + np.max(state.sound_speed()))
    if speed <= 0:
        speed = floor_speed
    return safety * float(np.min(state.grid.spacing)) / speed


@dataclass(frozen=True)
class _Regularized:
    q: np.ndarray
    v: np.ndarray
    sigma: np.ndarray
    qx: np.ndarray
    vx: np.ndarray
    sx: np.ndarray


def _regularized(state: FluidState, cfg: StepConfig) -> _Regularized:
    """(q, v, sigma) after psi_h at the state's own nodes, with first derivatives.

    Widths below the node spacing are accepted here: the kernel then acts on the
    cubic-spline reconstruction of the data.
    """
    fields = np.stack([state.q, state.v, state.sigma], axis=1)
    hat = mollify(fields, state, cfg.h, state.x, default_kernels(cfg.kernel_moments),
                  cfg.width_const, check_resolution=False)
    g = state.grid
    q, v, s = hat[:, 0], hat[:, 1], hat[:, 2]
    return _Regularized(q, v, s, derivative(q, g, 1), derivative(v, g, 1), derivative(s, g, 1))


def _pushed_nodes(state: FluidState, reg: _Regularized, eps: float) -> np.ndarray:
    jac = 1.0 + eps * reg.vx
    if np.any(jac <= 0):
        i = int(np.argmin(jac))
        raise FoldedFlow(f"Jacobian {jac[i]:.3e} at x={state.x[i]:.6g}")
    x = state.x + eps * reg.v
    if np.any(np.diff(x) <= 0):
        raise FoldedFlow("pushed nodes are not increasing")
    return x


def one_step(state: FluidState, cfg: StepConfig, eps: float | None = None) -> FluidState:
    """One regularized Euler polygonal step; ``eps`` overrides cfg.eps."""
    eps = cfg.eps if eps is None else eps
    if eps == 0:
        return state
    beta = state.params.beta
    reg = _regularized(state, cfg)
    x = _pushed_nodes(state, reg, eps)
    q1 = reg.q * (1.0 - eps * beta * reg.vx)
    v1 = reg.v - eps * reg.sigma * reg.qx
    s1 = reg.sigma
    q1[0] = q1[-1] = 0.0

    n = cfg.uniform_count or state.grid.n
    grid = Grid.uniform(x[0], x[-1], n)
    xs = grid.nodes
    q = _pin_q(monotone_cubic(x, q1)(xs), cfg.clamp_tol)
    v = monotone_cubic(x, v1)(xs)
    s = monotone_cubic(x, s1)(xs)
    new = FluidState(grid, q, v, s, state.params, state.t + eps)
    c = nondegeneracy(new).c
    if c < cfg.c_min:
        raise ContinuationViolation("nondegeneracy", new.t, c)
    return new


@dataclass
class Trajectory:
    snapshots: list
    reports: list
    cfg: StepConfig | None = None
    violation: dict | None = None
    step_times: list = field(default_factory=list)

    @property
    def times(self) -> np.ndarray:
        return np.array([s.t for s in self.snapshots])

    @property
    def final(self) -> FluidState:
        return self.snapshots[-1]


Reporter = Callable[[FluidState], EnergyReport]


def run(state0: FluidState, T: float, cfg: StepConfig, report_every: int = 1, snapshot_every: int = 1,
        reporter: Reporter | None = energy_report) -> Trajectory:
    """Step from state0 to time state0.t + T.

    Reports and snapshots are kept every ``report_every`` / ``snapshot_every`` steps
    and always at the final time. A continuation violation ends the run early and is
    recorded on the trajectory.
    """
    if T < 0:
        raise ValueError("T must be nonnegative")
    traj = Trajectory([state0], [], cfg)
    if reporter is not None:
        traj.reports.append(reporter(state0))
    if T == 0:
        return traj
    if cfg.eps <= 0:
        raise ValueError("run needs eps > 0")
    n = max(1, math.ceil(T / cfg.eps - 1e-9))
    t_end = state0.t + T
    state = state0
    for i in range(1, n + 1):
        eps = cfg.eps if i < n else t_end - state.t
        try:
            state = one_step(state, cfg, eps)
        except ContinuationViolation as exc:
            traj.violation = exc.record()
            break
        last = i == n
        if last or i % snapshot_every == 0:
            traj.snapshots.append(state)
        if reporter is not None and (last or i % report_every == 0):
            traj.reports.append(reporter(state))
    if traj.snapshots[-1] is not state:
        traj.snapshots.append(state)
    return traj


@dataclass(frozen=True)
class LinearizedSample:
    t: float
    s: np.ndarray
    w: np.ndarray
    zeta: np.ndarray
    e_lin: float
    b_lin: float


def evolve_linearized(background: Trajectory, s0, w0, zeta0) -> list[LinearizedSample]:
    """Propagate (s, w, zeta) along a background stored at every step."""
    snaps = background.snapshots
    cfg = background.cfg
    if cfg is None:
        raise ValueError("background trajectory lacks its step configuration")
    fields = [np.asarray(a, float) for a in (s0, w0, zeta0)]
    n0 = snaps[0].grid.n
    if any(f.shape != (n0,) for f in fields):
        raise GridMismatch("perturbation does not live on the initial background grid")
    s, w, z = fields
    beta = snaps[0].params.beta
    out = [LinearizedSample(snaps[0].t, s, w, z, linear_energy(s, w, z, snaps[0]), b_lin(snaps[0]))]
    for cur, nxt in zip(snaps[:-1], snaps[1:]):
        eps = nxt.t - cur.t
        reg = _regularized(cur, cfg)
        x = _pushed_nodes(cur, reg, eps)
        if abs(x[0] - nxt.grid.left) > 1e-12 * cur.grid.length or abs(x[-1] - nxt.grid.right) > 1e-12 * cur.grid.length:
            raise GridMismatch("background snapshots are not consecutive steps")
        g = cur.grid
        sx, wx = derivative(s, g, 1), derivative(w, g, 1)
        s1 = s - eps * (w * reg.qx + beta * s * reg.vx + beta * reg.q * wx)
        w1 = w - eps * (w * reg.vx + reg.sigma * sx + z * reg.qx)
        z1 = z - eps * (w * reg.sx)
        xs = np.clip(nxt.x, x[0], x[-1])
        s, w, z = (monotone_cubic(x, f)(xs) for f in (s1, w1, z1))
        out.append(LinearizedSample(nxt.t, s, w, z, linear_energy(s, w, z, nxt), b_lin(nxt)))
    return out
