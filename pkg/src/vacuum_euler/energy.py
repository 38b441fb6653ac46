"""Conserved quantities, linear and modified energies, control parameters, Grönwall envelopes."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .calculus import (
    CTILDE_HALF,
    SeminormKind,
    derivative,
    holder_norm,
    seminorm,
    weighted_integrate,
)
from .errors import InvalidHistory
from .operators import apply_operator, good_unknowns
from .state import FluidState, NonDegeneracy, nondegeneracy


def conserved_quantities(state: FluidState) -> tuple[float, float]:
    """(E_phy, entropy mass int q^alpha sigma^2)."""
    p = state.params
    q, v, s, g = state.q, state.v, state.sigma, state.grid
    potential = weighted_integrate(np.ones_like(q), q, 1 + p.alpha, g)
    kinetic = 0.5 * (1 + p.beta) * weighted_integrate(v * v / s, q, p.alpha, g)
    mass = weighted_integrate(s * s, q, p.alpha, g)
    return potential + kinetic, mass


def linear_energy(s, w, zeta, state: FluidState) -> float:
    p = state.params
    s, w, zeta = (np.asarray(a, float) for a in (s, w, zeta))
    g, q = state.grid, state.q
    e = weighted_integrate(s * s, q, p.alpha - 1, g)
    e += weighted_integrate((p.beta * w * w + zeta * zeta) / state.sigma, q, p.alpha, g)
    return 0.5 * e


@dataclass(frozen=True)
class Energy2k:
    high: float
    low: float
    k: int

    @property
    def total(self) -> float:
        return self.high + self.low

    @property
    def exact(self) -> bool:
        return self.k == 1


def energy_2k(state: FluidState, k: int = 1) -> Energy2k:
    """Modified energy of order 2k; the vorticity part vanishes in one dimension."""
    p = state.params
    gu = good_unknowns(state, k)
    q, v, s, g = state.q, state.v, state.sigma, state.grid
    sig2k = s
    for _ in range(k):
        sig2k = apply_operator("L5", sig2k, state)
    integrand_s = gu.s2k**2
    high = weighted_integrate(integrand_s, q, p.alpha - 1, g)
    high += weighted_integrate(p.beta * gu.w2k**2 / s + sig2k**2, q, p.alpha, g)
    low = weighted_integrate(np.ones_like(q), q, 1 + p.alpha, g)
    low += weighted_integrate(0.5 * (1 + p.beta) * v * v / s + s * s, q, p.alpha, g)
    return Energy2k(high, low, k)


@dataclass(frozen=True)
class ControlReport:
    a_star: float
    b: float
    a_prime: float
    b_lin: float
    components: dict = field(default_factory=dict)


def b_lin(state: FluidState) -> float:
    g = state.grid
    return float(sum(np.max(np.abs(derivative(f, g, 1))) for f in (state.q, state.v, state.sigma)))


def compute_controls(state: FluidState, eps_star: float | None = None) -> ControlReport:
    es = state.params.eps_star if eps_star is None else eps_star
    g = state.grid
    q, v, s = state.q, state.v, state.sigma
    qx, vx, sx = (derivative(f, g, 1) for f in (q, v, s))
    sup = lambda f: float(np.max(np.abs(f)))  # noqa: E731
    half = SeminormKind.holder(0.5)
    c = {
        "q_C1eps": holder_norm(q, state, 1 + es),
        "v_Chalf_eps": holder_norm(v, state, 0.5 + es),
        "sigma_Chalf_eps": holder_norm(s, state, 0.5 + es),
        "inv_sigma_sup": sup(1.0 / s),
        "qx_sup": sup(qx),
        "qx_ctilde_semi": seminorm(qx, state, CTILDE_HALF),
        "vx_sup": sup(vx),
        "sigmax_sup": sup(sx),
        "v_Chalf": sup(v) + seminorm(v, state, half),
        "sigma_Chalf": sup(s) + seminorm(s, state, half),
    }
    a_star = c["q_C1eps"] + c["v_Chalf_eps"] + c["sigma_Chalf_eps"] + c["inv_sigma_sup"]
    b = c["qx_sup"] + c["qx_ctilde_semi"] + c["vx_sup"] + c["sigmax_sup"]
    a_prime = c["qx_sup"] + c["v_Chalf"] + c["sigma_Chalf"] + c["inv_sigma_sup"]
    blin = c["qx_sup"] + c["vx_sup"] + c["sigmax_sup"]
    return ControlReport(a_star, b, a_prime, blin, c)


@dataclass(frozen=True)
class EnergyReport:
    t: float
    e_phys: float
    entropy_mass: float
    e2k: dict
    controls: ControlReport
    nondeg: NonDegeneracy
    e_lin: float | None = None

    CSV_HEADER = ("t", "e_phys", "entropy_mass", "e2_high", "e2_low", "a_star", "b", "c_min")

    def csv_row(self) -> tuple:
        e2 = self.e2k.get(1)
        return (self.t, self.e_phys, self.entropy_mass,
                e2.high if e2 else float("nan"), e2.low if e2 else float("nan"),
                self.controls.a_star, self.controls.b, self.nondeg.c)


def energy_report(state: FluidState, ks: Sequence[int] = (1,), controls: bool = True) -> EnergyReport:
    e, m = conserved_quantities(state)
    e2k = {k: energy_2k(state, k) for k in ks}
    ctl = compute_controls(state) if controls else ControlReport(*(4 * [float("nan")]))
    return EnergyReport(state.t, e, m, e2k, ctl, nondegeneracy(state))


# ---------------------------------------------------------------------------
# Grönwall envelopes


def _check_history(times) -> np.ndarray:
    t = np.asarray(times, float)
    if t.ndim != 1 or t.size == 0:
        raise InvalidHistory("history is empty")
    if np.any(np.diff(t) < 0):
        raise InvalidHistory("history is not time-sorted")
    return t


def cumulative_integral(times, values) -> np.ndarray:
    t = _check_history(times)
    b = np.asarray(values, float)
    out = np.zeros_like(t)
    out[1:] = np.cumsum(0.5 * np.diff(t) * (b[1:] + b[:-1]))
    return out


def gronwall_envelope(history: Sequence[tuple[float, float]], e0: float, c_fit: float) -> np.ndarray:
    """e0 * exp(c_fit * int_0^t B) at the history times."""
    if len(history) == 0:
        raise InvalidHistory("history is empty")
    t, b = zip(*history)
    return e0 * np.exp(c_fit * cumulative_integral(t, b))


def fit_gronwall_constant(times, energies, b_values, method: str = "envelope") -> float:
    """Growth constant C in E(t) <= E(0) exp(C int B).

    ``envelope`` returns the smallest C for which the envelope dominates every
    sample; ``lstsq`` fits log(E/E0) against int B through the origin.
    """
    ib = cumulative_integral(times, b_values)
    e = np.asarray(energies, float)
    growth = np.log(e / e[0])
    mask = ib > 0
    if not mask.any():
        return 0.0
    if method == "envelope":
        return float(max(0.0, np.max(growth[mask] / ib[mask])))
    if method == "lstsq":
        return float(np.dot(ib, growth) / np.dot(ib, ib))
    raise ValueError(f"unknown fit method {method!r}")
