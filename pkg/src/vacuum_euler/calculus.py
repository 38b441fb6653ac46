"""Finite differences, weighted quadrature, weighted Sobolev norms and seminorms."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Mapping

import numpy as np

from .errors import InvalidIndices, Unsupported
from .state import FluidState, Grid

PAIR_SCAN_CAP = 2000


# ---------------------------------------------------------------------------
# derivatives


def _weights(x: np.ndarray, centers: np.ndarray, stencils: np.ndarray, order: int) -> np.ndarray:
    """Batched finite-difference weights: exact on polynomials of degree < stencil width."""
    off = x[stencils] - x[centers][:, None]
    hs = np.max(np.abs(off), axis=1, keepdims=True)
    z = off / hs
    m = stencils.shape[1]
    powers = np.arange(m)
    vander = z[:, None, :] ** powers[None, :, None]
    rhs = np.zeros((len(centers), m))
    rhs[:, order] = math.factorial(order)
    w = np.linalg.solve(vander, rhs[..., None])[..., 0]
    return w / hs**order


def _derivative_operator(grid: Grid, order: int) -> tuple[np.ndarray, np.ndarray]:
    cache = grid._cache
    key = ("d", order)
    if key in cache:
        return cache[key]
    x = grid.nodes
    n = x.size
    idx = np.zeros((n, 4), dtype=int)
    wts = np.zeros((n, 4))
    i = np.arange(n)
    if order == 1:
        st = np.stack([i - 1, i, i + 1], axis=1)
        st[0] = [0, 1, 2]
        st[-1] = [n - 3, n - 2, n - 1]
        idx[:, :3] = st
        wts[:, :3] = _weights(x, i, st, 1)
    else:
        h = np.diff(x)
        uniform = np.zeros(n, dtype=bool)
        uniform[1:-1] = np.abs(h[1:] - h[:-1]) <= 1e-9 * np.maximum(h[1:], h[:-1])
        three = np.flatnonzero(uniform)
        four = np.flatnonzero(~uniform)
        st3 = np.stack([three - 1, three, three + 1], axis=1)
        idx[three, :3] = st3
        wts[three, :3] = _weights(x, three, st3, 2)
        start = np.clip(four - 1, 0, n - 4)
        st4 = start[:, None] + np.arange(4)[None, :]
        idx[four] = st4
        wts[four] = _weights(x, four, st4, 2)
    cache[key] = (idx, wts)
    return idx, wts


def derivative(f, grid: Grid, order: int = 1) -> np.ndarray:
    """Second-order accurate first or second derivative on a (possibly nonuniform) grid."""
    if order not in (1, 2):
        raise Unsupported(f"derivative order {order} is not supported")
    if grid.n < 5:
        raise Unsupported("derivatives need at least 5 nodes")
    f = np.asarray(f, float)
    idx, w = _derivative_operator(grid, order)
    return np.einsum("ij,ij->i", w, f[idx])


def nth_derivative(f, grid: Grid, m: int) -> np.ndarray:
    """Derivative of order 0..4 by composing first and second order stencils."""
    f = np.asarray(f, float)
    if m == 0:
        return f.copy()
    if m in (1, 2):
        return derivative(f, grid, m)
    if m == 3:
        return derivative(derivative(f, grid, 2), grid, 1)
    if m == 4:
        return derivative(derivative(f, grid, 2), grid, 2)
    raise Unsupported(f"derivative order {m} exceeds 4")


# ---------------------------------------------------------------------------
# quadrature


def integrate(f, grid: Grid) -> float:
    """Trapezoidal rule."""
    return float(np.trapezoid(np.asarray(f, float), grid.nodes))


def weighted_integrate(g, r, power: float, grid: Grid) -> float:
    """Integral of r**power * g where r >= 0 vanishes at the endpoints.

    Nonnegative integer powers use the trapezoidal rule. Other powers (> -1) use
    product integration: on every cell r and g are taken linear and r**power is
    integrated exactly against them, so the endpoint behaviour costs no order.
    """
    g = np.asarray(g, float)
    r = np.asarray(r, float)
    x = grid.nodes
    if power >= 0 and float(power).is_integer():
        return float(np.trapezoid(np.power(r, power) * g, x))
    if power <= -1:
        raise ValueError("weight exponent must exceed -1")
    if np.any(r < 0):
        raise ValueError("weight base must be nonnegative")
    h = np.diff(x)
    r0, r1, g0, g1 = r[:-1], r[1:], g[:-1], g[1:]
    top = np.maximum(r0, r1)
    dr = r1 - r0
    flat = np.abs(dr) <= 0.05 * top
    # cells where r barely changes: Gauss rule on the linear interpolants
    t, wq = _GAUSS4
    rf = r0[flat, None] + dr[flat, None] * t
    gf = g0[flat, None] + (g1 - g0)[flat, None] * t
    total = float(np.sum(h[flat] * np.sum(wq * np.power(rf, power) * gf, axis=1)))
    # remaining cells: moments of r**power in closed form
    s = ~flat
    a, b, d, hs = r0[s], r1[s], dr[s], h[s]
    p1, p2 = power + 1, power + 2
    m0 = (b**p1 - a**p1) / (p1 * d)
    m1 = ((b**p2 - a**p2) / p2 - a * (b**p1 - a**p1) / p1) / (d * d)  # int t r^p, t in [0, 1]
    total += float(np.sum(hs * (g0[s] * m0 + (g1[s] - g0[s]) * m1)))
    return total


_gx, _gw = np.polynomial.legendre.leggauss(4)
_GAUSS4 = (0.5 * (_gx + 1), 0.5 * _gw)


# ---------------------------------------------------------------------------
# weighted Sobolev norms


@dataclass(frozen=True)
class NormSpec:
    j: int
    lam: float

    def __post_init__(self):
        if self.j < 0:
            raise ValueError("j must be nonnegative")
        if not self.lam > -0.5:
            raise ValueError("lambda must exceed -1/2")


def weighted_norm_terms(f, state: FluidState, spec: NormSpec) -> list[float]:
    """The squared summands of the H^{j, lambda} norm, one per derivative order."""
    if spec.j > 4:
        raise Unsupported("weighted norms support j <= 4")
    out = []
    for m in range(spec.j + 1):
        d = nth_derivative(f, state.grid, m)
        out.append(weighted_integrate(d * d, state.q, 2 * spec.lam, state.grid))
    return out


def weighted_norm(f, state: FluidState, spec: NormSpec) -> float:
    return math.sqrt(sum(weighted_norm_terms(f, state, spec)))


def weighted_lp(g, r, lam: float, p: float, grid: Grid) -> float:
    """||r^lam g||_{L^p}; p may be inf."""
    g = np.abs(np.asarray(g, float))
    r = np.asarray(r, float)
    if math.isinf(p):
        if lam < 0:
            mask = r > 0
            return float(np.max(r[mask] ** lam * g[mask])) if mask.any() else 0.0
        return float(np.max(np.power(r, lam) * g))
    return weighted_integrate(g**p, r, lam * p, grid) ** (1.0 / p)


# ---------------------------------------------------------------------------
# seminorms


@dataclass(frozen=True)
class SeminormKind:
    kind: str
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in ("holder", "ctilde_half", "lipschitz"):
            raise ValueError(f"unknown seminorm {self.kind!r}")
        if self.kind == "holder" and not (self.gamma is not None and 0 < self.gamma <= 1):
            raise ValueError("holder exponent must lie in (0, 1]")

    @classmethod
    def holder(cls, gamma: float) -> "SeminormKind":
        return cls("holder", gamma)


CTILDE_HALF = SeminormKind("ctilde_half")
LIPSCHITZ = SeminormKind("lipschitz")


def _pair_subset(n: int, rng_seed: int = 0) -> np.ndarray:
    if n <= PAIR_SCAN_CAP:
        return np.arange(n)
    # one random node per stratum, endpoints always kept
    rng = np.random.default_rng(rng_seed)
    edges = np.linspace(0, n, PAIR_SCAN_CAP - 1).astype(int)
    picks = [rng.integers(a, b) for a, b in zip(edges[:-1], edges[1:]) if b > a]
    return np.unique(np.concatenate([[0], picks, [n - 1]]))


def pair_sup(num: Callable, den: Callable, n: int, block: int = 512) -> float:
    """sup over i < j of num(i, j) / den(i, j) evaluated in row blocks."""
    sel = _pair_subset(n)
    best = 0.0
    for s in range(0, sel.size, block):
        i = sel[s:s + block][:, None]
        j = sel[None, :]
        mask = j > i
        nu = num(i, j)
        de = den(i, j)
        with np.errstate(divide="ignore", invalid="ignore"):
            r = np.where(mask & (de > 0), nu / np.where(de > 0, de, 1.0), 0.0)
        if r.size:
            best = max(best, float(np.max(r)))
    return best


def seminorm(f, state: FluidState, kind: SeminormKind) -> float:
    f = np.asarray(f, float)
    x = state.x
    if kind.kind == "ctilde_half":
        sq = np.sqrt(state.q)
        return pair_sup(lambda i, j: np.abs(f[i] - f[j]),
                        lambda i, j: sq[i] + sq[j] + np.sqrt(np.abs(x[i] - x[j])), f.size)
    g = 1.0 if kind.kind == "lipschitz" else kind.gamma
    return pair_sup(lambda i, j: np.abs(f[i] - f[j]),
                    lambda i, j: np.abs(x[i] - x[j]) ** g, f.size)


def holder_norm(f, state: FluidState, gamma: float) -> float:
    """||f||_{C^gamma}: sup plus seminorm for gamma in (0,1]; C^1 plus seminorm of f' above 1."""
    f = np.asarray(f, float)
    if gamma <= 1:
        return float(np.max(np.abs(f))) + seminorm(f, state, SeminormKind.holder(gamma))
    df = derivative(f, state.grid, 1)
    c1 = float(np.max(np.abs(f))) + float(np.max(np.abs(df)))
    return c1 + seminorm(df, state, SeminormKind.holder(gamma - 1))


def ctilde_norm(f, state: FluidState) -> float:
    """||f||_{C~^{0,1/2}} = sup |f| + C~^{1/2} seminorm."""
    f = np.asarray(f, float)
    return float(np.max(np.abs(f))) + seminorm(f, state, CTILDE_HALF)


# ---------------------------------------------------------------------------
# interpolation inequality checks


@dataclass(frozen=True)
class InterpCheck:
    prop_id: str
    lhs: float
    rhs: float
    ratio: float


def _inv(p: float) -> float:
    return 0.0 if math.isinf(p) else 1.0 / p


def _pfrom(inv: float) -> float:
    return math.inf if inv == 0 else 1.0 / inv


def _req(indices: Mapping, *names):
    try:
        return [float(indices[n]) for n in names]
    except KeyError as exc:
        raise InvalidIndices(f"missing index {exc.args[0]!r}") from None


def _weight_ok(lam: float, p: float) -> bool:
    return lam >= 0 if math.isinf(p) else lam > -1.0 / p


def _ratio(lhs: float, rhs: float) -> float:
    if rhs == 0:
        return 0.0 if lhs == 0 else math.inf
    return lhs / rhs


def interpolation_sides(prop_id: str, f, state: FluidState, indices: Mapping) -> tuple[float, float]:
    """Both sides (lhs, rhs) of one of the interpolation inequalities.

    ``r`` is the state's q. Indices per proposition:
      P1: m, j, p0, pm, lam0, lamm
      P2: m, j, pm, lamm
      P3: m, j, pm, lamm
      P4: m, j, pm, lamm
      Hardy3: alpha (f is a triple on a domain whose left end is the origin)
    """
    grid, r = state.grid, state.q
    d = state.params.dim
    if prop_id == "Hardy3":
        (alpha,) = _req(indices, "alpha")
        if alpha <= 0:
            raise InvalidIndices("alpha must be positive")
        f1, f2, f3 = (np.asarray(g, float) for g in f)
        xs = grid.nodes - grid.left
        lhs = weighted_integrate(np.abs(f1 * f2 * f3), xs, alpha - 1, grid)
        fs = (f1, f2, f3)
        rhs = 0.0
        for a in range(3):
            b, c = [k for k in range(3) if k != a]
            da = float(np.max(np.abs(derivative(fs[a], grid, 1))))
            nb = weighted_integrate(fs[b] ** 2, xs, alpha, grid) ** 0.5
            nc = weighted_integrate(fs[c] ** 2, xs, alpha, grid) ** 0.5
            rhs += da * nb * nc
        return lhs, rhs

    f = np.asarray(f, float)
    m, j = (int(v) for v in _req(indices, "m", "j"))
    if not 0 < j < m:
        raise InvalidIndices("need 0 < j < m")
    if m > 4:
        raise InvalidIndices("m must not exceed 4")
    pm, lamm = _req(indices, "pm", "lamm")
    if pm < 1:
        raise InvalidIndices("pm must be at least 1")
    dm = nth_derivative(f, grid, m)
    dj = nth_derivative(f, grid, j)

    if prop_id == "P1":
        p0, lam0 = _req(indices, "p0", "lam0")
        if p0 < 1:
            raise InvalidIndices("p0 must be at least 1")
        if not (_weight_ok(lam0, p0) and _weight_ok(lamm, pm)):
            raise InvalidIndices("weights must satisfy lambda > -1/p (lambda >= 0 for p = inf)")
        if not m - lamm - d * _inv(pm) > -lam0 - d * _inv(p0):
            raise InvalidIndices("exponent balance m - lam_m - d/p_m > -lam_0 - d/p_0 fails")
        th = j / m
        pj = _pfrom(th * _inv(pm) + (1 - th) * _inv(p0))
        lamj = th * lamm + (1 - th) * lam0
        lhs = weighted_lp(dj, r, lamj, pj, grid)
        rhs = weighted_lp(f, r, lam0, p0, grid) ** (1 - th) * weighted_lp(dm, r, lamm, pm, grid) ** th
        return lhs, rhs

    if math.isinf(pm) or pm <= 1:
        raise InvalidIndices("pm must lie in (1, inf)")
    if prop_id == "P2":
        if not -1 / pm < lamm < m - d / pm:
            raise InvalidIndices("need -1/pm < lam_m < m - d/pm")
        th = j / m
        pj, lamj = pm / th, th * lamm
        base = float(np.max(np.abs(f)))
    elif prop_id == "P3":
        if not -1 / pm < lamm < m - 0.5 - d / pm:
            raise InvalidIndices("need -1/pm < lam_m < m - 1/2 - d/pm")
        th = (j - 0.5) / (m - 0.5)
        pj, lamj = pm / th, th * lamm
        base = seminorm(f, state, SeminormKind.holder(0.5))
    elif prop_id == "P4":
        if not m / 2 - 1 < lamm < m - 0.5 - d / pm:
            raise InvalidIndices("need m/2 - 1 < lam_m < m - 1/2 - d/pm")
        th = j / m
        pj, lamj = pm / th, th * lamm - 0.5 * (1 - th)
        base = ctilde_norm(f, state)
    else:
        raise InvalidIndices(f"unknown proposition {prop_id!r}")
    if not _weight_ok(lamj, pj):
        raise InvalidIndices("derived weight on the left side is not integrable")
    lhs = weighted_lp(dj, r, lamj, pj, grid)
    rhs = base ** (1 - th) * weighted_lp(dm, r, lamm, pm, grid) ** th
    return lhs, rhs


def check_interpolation(prop_id: str, f, state: FluidState, indices: Mapping) -> float:
    """LHS / RHS of the named interpolation inequality."""
    lhs, rhs = interpolation_sides(prop_id, f, state, indices)
    return _ratio(lhs, rhs)


def embedding_ratio(f, state: FluidState, hi: NormSpec, lo: NormSpec) -> float:
    """||f||_lo / ||f||_hi for a Hardy-type embedding with equal s - lambda."""
    if not (hi.j > lo.j and abs((hi.j - hi.lam) - (lo.j - lo.lam)) < 1e-12):
        raise InvalidIndices("embedding needs s1 > s2 and s1 - lambda1 = s2 - lambda2")
    return _ratio(weighted_norm(f, state, lo), weighted_norm(f, state, hi))


# ---------------------------------------------------------------------------
# corpus


CORPUS_FIELDS: dict[str, Callable[[np.ndarray], np.ndarray]] = {
    "sin3x": lambda x: np.sin(3 * x),
    "cos2x": lambda x: np.cos(2 * x),
    "exp": np.exp,
    "x2": lambda x: x * x,
}

POLY_DEGREE = {"x2": 2}

CORPUS_INDICES: tuple[tuple[str, dict], ...] = (
    ("P1", {"m": 2, "j": 1, "p0": 2, "pm": 2, "lam0": 0.0, "lamm": 1.0}),
    ("P1", {"m": 2, "j": 1, "p0": math.inf, "pm": 2, "lam0": 0.0, "lamm": 0.5}),
    ("P2", {"m": 2, "j": 1, "pm": 2, "lamm": 0.5}),
    ("P3", {"m": 2, "j": 1, "pm": 2, "lamm": 0.5}),
    ("P4", {"m": 2, "j": 1, "pm": 2, "lamm": 0.5}),
    ("P4", {"m": 3, "j": 1, "pm": 2, "lamm": 1.2}),
)

HARDY_FIELDS: dict[str, tuple[Callable, Callable, Callable]] = {
    "x(1-x)^3": (lambda x: x * (1 - x),) * 3,
    "mixed": (lambda x: x * (1 - x), lambda x: x * (1 - x) ** 2, lambda x: np.sin(np.pi * x)),
}


@dataclass(frozen=True)
class CorpusRow:
    prop_id: str
    f_id: str
    indices: str
    lhs: float
    rhs: float
    ratio: float

    CSV_HEADER = ("prop_id", "f_id", "indices", "lhs", "rhs", "ratio")

    def csv_fields(self) -> tuple:
        return (self.prop_id, self.f_id, self.indices, repr(self.lhs), repr(self.rhs), repr(self.ratio))


def _index_label(ind: Mapping) -> str:
    return ";".join(f"{k}={ind[k]}" for k in sorted(ind))


def interpolation_corpus(state: FluidState, hardy_state: FluidState) -> list[CorpusRow]:
    """Evaluate every corpus entry; Hardy3 entries use ``hardy_state`` (domain starting at 0)."""
    rows = []
    x = state.x
    for prop, ind in CORPUS_INDICES:
        for fid, fn in CORPUS_FIELDS.items():
            if POLY_DEGREE.get(fid, math.inf) < ind["m"]:
                continue  # top derivative vanishes identically
            lhs, rhs = interpolation_sides(prop, fn(x), state, ind)
            rows.append(CorpusRow(prop, fid, _index_label(ind), lhs, rhs, _ratio(lhs, rhs)))
    xh = hardy_state.x - hardy_state.grid.left
    for fid, fns in HARDY_FIELDS.items():
        ind = {"alpha": hardy_state.params.alpha}
        lhs, rhs = interpolation_sides("Hardy3", tuple(fn(xh) for fn in fns), hardy_state, ind)
        rows.append(CorpusRow("Hardy3", fid, _index_label(ind), lhs, rhs, _ratio(lhs, rhs)))
    return rows
