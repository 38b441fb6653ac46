"""Degenerate elliptic operators L0..L5, their Dirichlet forms and the good unknowns.

In one dimension the curl operator L3 and every vorticity term vanish.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .calculus import derivative, weighted_integrate
from .errors import Unsupported
from .state import FluidState

_NAMES = ("L0", "L1", "L2", "L3", "L4", "L5")
_FORMS = {"L1": "L1", "L2+L3": "L2+L3", "L4combined": "L2+L3"}


@dataclass(frozen=True)
class OperatorId:
    name: str
    lam: float = 0.0

    def __post_init__(self):
        if self.name not in _NAMES:
            raise ValueError(f"unknown operator {self.name!r}")
        if self.lam < 0:
            raise ValueError("shift must be nonnegative")
        if self.lam and self.name not in ("L1", "L2"):
            raise ValueError("only L1 and L2 have shifted variants")


def _op(op) -> OperatorId:
    return op if isinstance(op, OperatorId) else OperatorId(op)


def weight_exponent(op, params) -> float:
    """Exponent p of the weight q^p in which the operator is symmetric."""
    return params.alpha - 1 if _op(op).name == "L1" else params.alpha


def apply_operator(op, u, state: FluidState) -> np.ndarray:
    op = _op(op)
    u = np.asarray(u, float)
    g = state.grid
    beta, alpha = state.params.beta, state.params.alpha
    q = state.q
    qx = derivative(q, g, 1)
    if op.name == "L3":
        return np.zeros_like(u)
    if op.name == "L0":
        return derivative(q, g, 2) * u
    ux = derivative(u, g, 1)
    uxx = derivative(u, g, 2)
    if op.name == "L1":
        return beta * q * uxx + (1 + op.lam * beta) * qx * ux
    if op.name == "L5":
        return q * uxx + (1 + alpha) * qx * ux
    # beta (q u_x)_x + u_x q_x, expanded so the q factor multiplies u_xx
    l2 = beta * (q * uxx + qx * ux) + (1 + op.lam * beta) * qx * ux
    if op.name == "L2":
        return l2
    return l2 + derivative(q, g, 2) * u  # L4


def inner(u, w, state: FluidState, power: float) -> float:
    """<u, w> in L^2(q^power dx)."""
    return weighted_integrate(np.asarray(u, float) * np.asarray(w, float), state.q, power, state.grid)


def dirichlet_form(op: str, u, w, state: FluidState) -> float:
    """Integrated-by-parts form of <op u, w> in the operator's own weighted space.

    L1:     -beta * int q^alpha u_x w_x
    L2+L3:  -beta^2/(1+beta) * int q^(1+alpha) [(1+alpha) u_x w_x + u_x w_x - u_x w_x]
            which in one dimension equals -beta * int q^(1+alpha) u_x w_x.
    """
    kind = _FORMS.get(op)
    if kind is None:
        raise Unsupported(f"no Dirichlet form for {op!r}")
    g = state.grid
    beta, alpha = state.params.beta, state.params.alpha
    ux = derivative(u, g, 1)
    wx = derivative(w, g, 1)
    if kind == "L1":
        return -beta * weighted_integrate(ux * wx, state.q, alpha, g)
    # the gradient and transposed-gradient terms cancel in one dimension
    coef = -beta**2 / (1 + beta) * (1 + alpha)
    return coef * weighted_integrate(ux * wx, state.q, 1 + alpha, g)


def adjointness_defect(op, u, w, state: FluidState, floor: float = 1e-300) -> float:
    op = _op(op)
    p = weight_exponent(op, state.params)
    lu = apply_operator(op, u, state)
    lw = apply_operator(op, w, state)
    a = inner(lu, w, state, p)
    b = inner(u, lw, state, p)
    nu = np.sqrt(inner(u, u, state, p))
    nw = np.sqrt(inner(w, w, state, p))
    return abs(a - b) / (nu * nw + floor)


@dataclass(frozen=True)
class GoodUnknowns:
    """s2, w2 and the modified unknowns of order 2k.

    ``s2k`` and ``w2k`` equal sigma^-1 s2 and sigma^-1 w2 for k = 1 (exact) and the
    leading-order recurrence L1^(k-1), L2^(k-1) applied to them for k >= 2.
    """

    s2: np.ndarray
    w2: np.ndarray
    s2k: np.ndarray
    w2k: np.ndarray
    k: int

    @property
    def exact(self) -> bool:
        return self.k == 1


def good_unknowns(state: FluidState, k: int = 1) -> GoodUnknowns:
    if k < 1:
        raise ValueError("k must be at least 1")
    if k > 3:
        raise Unsupported("good unknowns are available for k <= 3")
    g = state.grid
    beta = state.params.beta
    q, v, s = state.q, state.v, state.sigma
    qx, qxx = derivative(q, g, 1), derivative(q, g, 2)
    vx, vxx = derivative(v, g, 1), derivative(v, g, 2)
    sx = derivative(s, g, 1)
    s2 = beta * q * s * qxx + beta * q * qx * sx + beta * q * (beta + 1) * vx**2 + 0.5 * s * qx**2
    w2 = beta * q * s * vxx + s * (beta + 1) * vx * qx
    ms, mw = s2 / s, w2 / s
    for _ in range(k - 1):
        ms = apply_operator("L1", ms, state)
        mw = apply_operator("L2", mw, state)
    return GoodUnknowns(s2, w2, ms, mw, k)
