"""Exact affine motions q = b(r^2 - x^2), v = a x, sigma = const.

Substituting the ansatz into the equations gives the closed system
    r' = a r,   b' = -(beta + 2) a b,   a' = 2 sigma b - a^2,
with first integral b r^(beta + 2).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .calculus import derivative
from .errors import OracleToleranceFailure
from .state import FluidState, Grid, Params

ORACLE_TOL = 1e-10


@dataclass(frozen=True)
class AffineOrbit:
    a: float
    b: float
    r: float
    sigma_bar: float = 1.0
    params: Params = Params()

    def __post_init__(self):
        if not (self.b > 0 and self.r > 0 and self.sigma_bar > 0):
            raise ValueError("affine orbit needs b, r, sigma_bar > 0")

    @property
    def invariant(self) -> float:
        return self.b * self.r ** (self.params.beta + 2)

    def q(self, x) -> np.ndarray:
        return self.b * (self.r**2 - np.asarray(x, float) ** 2)

    def v(self, x) -> np.ndarray:
        return self.a * np.asarray(x, float)

    def vector(self) -> np.ndarray:
        return np.array([self.a, self.b, self.r])

    def with_vector(self, y) -> "AffineOrbit":
        return replace(self, a=float(y[0]), b=float(y[1]), r=float(y[2]))


def affine_rhs(orbit: AffineOrbit) -> tuple[float, float, float]:
    a, b, r = orbit.a, orbit.b, orbit.r
    beta = orbit.params.beta
    return 2 * orbit.sigma_bar * b - a * a, -(beta + 2) * a * b, a * r


def _f(y: np.ndarray, beta: float, sig: float) -> np.ndarray:
    a, b, r = y
    return np.array([2 * sig * b - a * a, -(beta + 2) * a * b, a * r])


def _rk4(y0: np.ndarray, T: float, n: int, beta: float, sig: float) -> np.ndarray:
    """States at the n + 1 equally spaced times in [0, T]."""
    dt = T / n
    out = np.empty((n + 1, 3))
    out[0] = y = y0.copy()
    for i in range(n):
        k1 = _f(y, beta, sig)
        k2 = _f(y + 0.5 * dt * k1, beta, sig)
        k3 = _f(y + 0.5 * dt * k2, beta, sig)
        k4 = _f(y + dt * k3, beta, sig)
        y = y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        out[i + 1] = y
    return out


@dataclass(frozen=True)
class AffineHistory:
    times: np.ndarray
    orbits: tuple[AffineOrbit, ...]
    error_estimate: float

    @property
    def final(self) -> AffineOrbit:
        return self.orbits[-1]


def integrate_affine(ic: AffineOrbit, T: float, dt: float, tol: float = ORACLE_TOL) -> AffineHistory:
    """Classical RK4 with a Richardson half-step error estimate."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    if T == 0:
        return AffineHistory(np.array([0.0]), (ic,), 0.0)
    if dt > T / 100 * (1 + 1e-12):
        raise ValueError("dt must not exceed T/100")
    n = math.ceil(T / dt - 1e-9)
    beta, sig = ic.params.beta, ic.sigma_bar
    y0 = ic.vector()
    coarse = _rk4(y0, T, n, beta, sig)
    fine = _rk4(y0, T, 2 * n, beta, sig)[::2]
    err = float(np.max(np.abs(coarse - fine)) / 15.0)
    if not err <= tol:
        raise OracleToleranceFailure(f"Richardson estimate {err:.3e} exceeds {tol:.1e}")
    times = np.linspace(0.0, T, n + 1)
    orbits = tuple(ic.with_vector(y) for y in fine)
    return AffineHistory(times, orbits, err)


def orbit_at(ic: AffineOrbit, T: float, tol: float = 1e-12) -> AffineOrbit:
    """Orbit at time T, refining the step until the error estimate is below ``tol``."""
    if T == 0:
        return ic
    dt = T / 100
    for _ in range(12):
        try:
            return integrate_affine(ic, T, dt, tol).final
        except OracleToleranceFailure:
            dt /= 2
    raise OracleToleranceFailure("could not reach the requested oracle tolerance")


def affine_state(orbit: AffineOrbit, node_count: int, t: float = 0.0) -> FluidState:
    grid = Grid.uniform(-orbit.r, orbit.r, node_count)
    x = grid.nodes
    q = orbit.q(x)
    q[0] = q[-1] = 0.0
    sigma = np.full(node_count, orbit.sigma_bar)
    return FluidState(grid, q, orbit.v(x), sigma, orbit.params, t)


def pde_residual(orbit: AffineOrbit, node_count: int) -> float:
    """Sup of the finite-difference residual of the ansatz under the equations."""
    st = affine_state(orbit, node_count)
    x, g = st.x, st.grid
    da, db, dr = affine_rhs(orbit)
    beta, sig = orbit.params.beta, orbit.sigma_bar
    q, v = st.q, st.v
    q_t = db * (orbit.r**2 - x**2) + 2 * orbit.b * orbit.r * dr
    v_t = da * x
    qx, vx = derivative(q, g, 1), derivative(v, g, 1)
    r1 = q_t + v * qx + beta * q * vx
    r2 = v_t + v * vx + sig * qx
    return float(max(np.max(np.abs(r1)), np.max(np.abs(r2))))


def orbit_csv_rows(history: AffineHistory) -> list[tuple[float, float, float, float, float]]:
    return [(float(t), o.a, o.b, o.r, o.invariant) for t, o in zip(history.times, history.orbits)]
