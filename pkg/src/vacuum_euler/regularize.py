"""Boundary-adapted mollification with vanishing-moment kernels.

The operator psi_h acts on a field f given on the gas domain by

    (psi_h f)(x) = sum_l theta_l(x) int K_l(x, y) f(y) dy,

where theta_l is a smooth partition of unity over dyadic layers of q (layer l is
where q / max q is about 2^-2l) and K_l has width
w_l = c (2^-2h + 2^-h sqrt(max q) 2^-min(l, h)). Far from the boundary K_l is a
centered kernel; within a couple of widths of the boundary it blends into a kernel
whose support starts at the target and extends inward. Targets on the exterior
strip of the enlarged grid use a kernel shifted one more width inward, so every
read stays inside the domain. Every
kernel has unit mass and N vanishing moments, which makes psi_h exact on
polynomials of degree N wherever the data are.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import CubicSpline

from .calculus import NormSpec, weighted_integrate, weighted_norm
from .errors import DomainTooNarrow, KernelConstructionFailed, ResolutionTooCoarse
from .state import FluidState

WIDTH_CONST = 0.25
SHIFT = 1.0
EXTERIOR_SHIFT = 2.0
QUAD_POINTS = 48
DEFAULT_MOMENTS = 4


def smoothstep(u):
    """Quintic smoothstep clipped to [0, 1]."""
    u = np.clip(u, 0.0, 1.0)
    return u**3 * (10 - 15 * u + 6 * u * u)


def bump(u):
    u = np.asarray(u, float)
    out = np.zeros_like(u)
    m = np.abs(u) < 1
    out[m] = np.exp(-1.0 / (1.0 - u[m] ** 2))
    return out


@dataclass(frozen=True, eq=False)
class KernelSpec:
    """phi(z) = bump(z - offset) * P(z - offset), sampled at Gauss-Legendre nodes.

    Kernel coordinates are measured from the target point in units of the width,
    positive toward the domain interior.
    """

    moments: int
    support_radius: float
    offset: float
    nodes: np.ndarray
    weights: np.ndarray
    values: np.ndarray
    coeffs: np.ndarray

    def __call__(self, z) -> np.ndarray:
        u = (np.asarray(z, float) - self.offset) / self.support_radius
        return bump(u) * np.polynomial.polynomial.polyval(u, self.coeffs) / self.support_radius

    @property
    def taps(self) -> np.ndarray:
        """Quadrature weight times kernel value at each node."""
        return self.weights * self.values

    def moment(self, m: int) -> float:
        return float(np.sum(self.taps * self.nodes**m))

    @property
    def mass(self) -> float:
        return self.moment(0)


def build_kernel(N: int = DEFAULT_MOMENTS, offset: float = SHIFT, support_radius: float = 1.0,
                 quad_points: int = QUAD_POINTS) -> KernelSpec:
    """Unit-mass kernel with vanishing moments 1..N.

    The polynomial coefficients solve the moment system under the same
    quadrature rule that applies the kernel, so the discrete moments hold to
    rounding.
    """
    if not 0 <= N <= 6:
        raise ValueError("N must lie in 0..6")
    u, wq = np.polynomial.legendre.leggauss(quad_points)
    z = offset + support_radius * u
    wz = wq * support_radius
    b = bump(u) / support_radius
    powers = np.arange(N + 1)
    # scaled polynomial basis keeps the system well conditioned
    M = (wz * b * (z[None, :] / (abs(offset) + support_radius)) ** powers[:, None]) @ (u[:, None] ** powers[None, :])
    rhs = np.zeros(N + 1)
    rhs[0] = 1.0
    cond = np.linalg.cond(M)
    if not np.isfinite(cond) or cond > 1e12:
        raise KernelConstructionFailed(f"moment system condition number {cond:.2e}")
    coeffs = np.linalg.solve(M, rhs)
    values = b * np.polynomial.polynomial.polyval(u, coeffs)
    return KernelSpec(N, support_radius, offset, z, wz, values, coeffs)


@dataclass(frozen=True)
class KernelSet:
    centered: KernelSpec
    shifted: KernelSpec
    exterior: KernelSpec

    @classmethod
    def build(cls, N: int = DEFAULT_MOMENTS) -> "KernelSet":
        return cls(build_kernel(N, 0.0), build_kernel(N, SHIFT), build_kernel(N, EXTERIOR_SHIFT))


_DEFAULT_SETS: dict[int, KernelSet] = {}


def default_kernels(N: int = DEFAULT_MOMENTS) -> KernelSet:
    if N not in _DEFAULT_SETS:
        _DEFAULT_SETS[N] = KernelSet.build(N)
    return _DEFAULT_SETS[N]


# ---------------------------------------------------------------------------
# layers


def layer_count(h: float) -> int:
    return max(0, math.ceil(h - 1e-12))


def layer_widths(h: float, qmax: float, c: float = WIDTH_CONST) -> np.ndarray:
    ell = np.arange(layer_count(h) + 1)
    return c * (2.0 ** (-2 * h) + 2.0 ** (-h) * math.sqrt(qmax) * 2.0 ** (-np.minimum(ell, h)))


def layer_weights(qbar, h: float) -> np.ndarray:
    """theta_l at each point, shape (points, layers); rows sum to one."""
    L = layer_count(h)
    qbar = np.asarray(qbar, float)
    with np.errstate(divide="ignore"):
        s = np.where(qbar > 0, 0.5 * np.log2(1.0 / np.maximum(qbar, 1e-300)), np.inf)
    s = np.clip(s, 0.0, L)
    if L == 0:
        return np.ones((qbar.size, 1))
    t = smoothstep((s[:, None] - np.arange(L)[None, :] - 0.25) / 0.5)
    theta = np.empty((qbar.size, L + 1))
    theta[:, 0] = 1.0 - t[:, 0]
    theta[:, 1:L] = t[:, :-1] - t[:, 1:]
    theta[:, L] = t[:, -1]
    return theta


@dataclass(frozen=True)
class LayerDecomposition:
    h: float
    layers: dict


def layer_decomposition(state: FluidState, h: float) -> LayerDecomposition:
    """Assign each interior node to its dominant dyadic layer."""
    qbar = state.q / np.max(state.q)
    theta = layer_weights(qbar[1:-1], h)
    dom = np.argmax(theta, axis=1)
    layers = {int(l): np.flatnonzero(dom == l) + 1 for l in np.unique(dom)}
    return LayerDecomposition(h, layers)


# ---------------------------------------------------------------------------
# mollification


def _shift_blend(dist_over_w):
    """1 when the target is within 1.25 widths of the boundary, 0 beyond 2.5."""
    return 1.0 - smoothstep((dist_over_w - 1.25) / 1.25)


def mollify(fields, state: FluidState, h: float, points, kernels: KernelSet | None = None,
            c: float = WIDTH_CONST, check_resolution: bool = True) -> np.ndarray:
    """Evaluate psi_h on one or more fields (columns) at arbitrary points.

    Points may lie up to c 2^-2h outside the domain.
    """
    kernels = kernels or default_kernels()
    F = np.asarray(fields, float)
    single = F.ndim == 1
    if single:
        F = F[:, None]
    pts = np.asarray(points, float)
    out = np.empty((pts.size, F.shape[1]))
    const = np.all(F == F[:1], axis=0)
    out[:, const] = F[0, const]
    if const.all():
        return out[:, 0] if single else out

    x = state.x
    left, right = state.grid.left, state.grid.right
    qmax = float(np.max(state.q))
    widths = layer_widths(h, qmax, c)
    if check_resolution and widths[0] < float(np.min(np.diff(x))):
        raise ResolutionTooCoarse(f"kernel width {widths[0]:.3e} is below the node spacing")
    if 0.5 * (right - left) < 2.5 * widths[0]:
        raise DomainTooNarrow("domain is narrower than the kernel footprint")
    margin = c * 2.0 ** (-2 * h)
    if np.any(pts < left - margin * (1 + 1e-9)) or np.any(pts > right + margin * (1 + 1e-9)):
        raise DomainTooNarrow("target points beyond the enlarged domain")

    qt = np.interp(pts, x, state.q, left=0.0, right=0.0)
    theta = layer_weights(qt / qmax, h)
    pi, li = np.nonzero(theta > 0)
    th = theta[pi, li]
    p = pts[pi]
    w = widths[li]
    dist = np.minimum(p - left, right - p)
    outside = dist < 0
    lam = np.where(outside, 0.0, _shift_blend(dist / w))
    direction = np.where(p < 0.5 * (left + right), 1.0, -1.0)
    ones = np.ones_like(p)

    spline = CubicSpline(x, F[:, ~const], bc_type="not-a-knot")
    acc = np.zeros((pts.size, int((~const).sum())))
    tol = 1e-12 * (right - left)
    groups = (
        (kernels.centered, np.where(outside, 0.0, th * (1 - lam)), ones),
        (kernels.shifted, np.where(outside, 0.0, th * lam), direction),
        (kernels.exterior, np.where(outside, th, 0.0), direction),
    )
    for ker, coef, dirs in groups:
        rows = coef > 0
        if not rows.any():
            continue
        y = p[rows, None] + dirs[rows, None] * w[rows, None] * ker.nodes[None, :]
        if y.min() < left - tol or y.max() > right + tol:
            raise DomainTooNarrow("kernel reads leave the gas domain")
        vals = spline(np.clip(y, left, right))
        contrib = np.einsum("rk,rkm->rm", np.broadcast_to(ker.taps, y.shape), vals)
        np.add.at(acc, pi[rows], coef[rows, None] * contrib)
    out[:, ~const] = acc
    return out[:, 0] if single else out


@dataclass(frozen=True)
class RegularizedField:
    nodes: np.ndarray
    values: np.ndarray
    h: float
    inner: slice

    def on_domain(self) -> np.ndarray:
        return self.values[self.inner]


def enlarged_nodes(state: FluidState, h: float, c: float = WIDTH_CONST) -> tuple[np.ndarray, slice]:
    x = state.x
    margin = c * 2.0 ** (-2 * h)
    hl, hr = x[1] - x[0], x[-1] - x[-2]
    kl = max(1, math.ceil(margin / hl))
    kr = max(1, math.ceil(margin / hr))
    lo = x[0] - margin * np.arange(kl, 0, -1) / kl
    hi = x[-1] + margin * np.arange(1, kr + 1) / kr
    return np.concatenate([lo, x, hi]), slice(kl, kl + x.size)


def regularize_field(f, state: FluidState, h: float, kernels: KernelSet | None = None,
                     c: float = WIDTH_CONST, check_resolution: bool = True) -> RegularizedField:
    """psi_h f on the grid enlarged by c 2^-2h on both sides."""
    if h < 0:
        raise ValueError("h must be nonnegative")
    nodes, inner = enlarged_nodes(state, h, c)
    vals = mollify(f, state, h, nodes, kernels, c, check_resolution)
    return RegularizedField(nodes, vals, h, inner)


# ---------------------------------------------------------------------------
# rate studies


@dataclass
class StudyResult:
    h: list
    error_norm: list
    diff_norm: list
    error_slope: float | None
    diff_slope: float | None
    status: str = "ok"
    predicted_slope: float = -2.0
    extra: dict = field(default_factory=dict)

    def footer(self) -> dict:
        return {"error_slope": self.error_slope, "diff_slope": self.diff_slope,
                "status": self.status, "predicted_slope": self.predicted_slope}

    def to_csv(self) -> str:
        lines = ["h,error_norm,diff_norm"]
        for h, e, d in zip(self.h, self.error_norm, self.diff_norm):
            lines.append(f"{h!r},{e!r},{d!r}")
        lines.append("# " + json.dumps(self.footer(), sort_keys=True))
        return "\n".join(lines) + "\n"


def _slope(h, vals) -> float:
    return float(np.polyfit(np.asarray(h, float), np.log2(np.asarray(vals, float)), 1)[0])


def regularization_study(f, state: FluidState, k: int = 1, h_range=range(2, 7), lam: float | None = None,
                         kernels: KernelSet | None = None, c: float = WIDTH_CONST) -> StudyResult:
    """Decay of (Id - psi_h) f and (psi_{h+1} - psi_h) f in H^{0,(lam-1)/2} against h."""
    hs = [float(h) for h in h_range]
    if len(hs) < 4:
        raise ValueError("need at least four scale indices")
    lam = state.params.alpha if lam is None else lam
    f = np.asarray(f, float)
    spec_pow = lam - 1
    norm = lambda g: math.sqrt(weighted_integrate(g * g, state.q, spec_pow, state.grid))  # noqa: E731
    psi = {h: mollify(f, state, h, state.x, kernels, c) for h in hs + [hs[-1] + 1]}
    err = [norm(f - psi[h]) for h in hs]
    dif = [norm(psi[h + 1] - psi[h]) for h in hs]
    scale = max(norm(f), 1e-300)
    if max(err) <= 1e-13 * scale:
        return StudyResult(hs, err, dif, None, None, "ExactlyReproduced", -2.0 * k)
    return StudyResult(hs, err, dif, _slope(hs, err), _slope(hs, dif), "ok", -2.0 * k)


def smoothing_constant(f, state: FluidState, h: float, lam: float | None = None,
                       kernels: KernelSet | None = None) -> float:
    """||psi_h f||_{H^{2, 1+(lam-1)/2}} / (2^{2h} ||f||_{H^{0,(lam-1)/2}})."""
    lam = state.params.alpha if lam is None else lam
    g = mollify(f, state, h, state.x, kernels)
    top = weighted_norm(g, state, NormSpec(2, 1 + (lam - 1) / 2))
    bottom = weighted_norm(f, state, NormSpec(0, (lam - 1) / 2))
    return top / (2.0 ** (2 * h) * bottom)
