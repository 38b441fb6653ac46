import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vacuum_euler.errors import DomainTooNarrow, KernelConstructionFailed, ResolutionTooCoarse
from vacuum_euler.regularize import (
    KernelSet, bump, build_kernel, default_kernels, enlarged_nodes, layer_count, layer_decomposition,
    layer_weights, layer_widths, mollify, regularization_study, regularize_field, smoothing_constant,
    smoothstep,
)

from conftest import parabola_state


def test_smoothstep_and_bump():
    assert smoothstep(0.0) == 0.0 and smoothstep(1.0) == 1.0 and smoothstep(0.5) == 0.5
    assert smoothstep(-3.0) == 0.0 and smoothstep(7.0) == 1.0
    b = bump(np.array([-1.0, 0.0, 1.0, 2.0]))
    assert b[0] == 0 and b[2] == 0 and b[3] == 0 and b[1] == pytest.approx(np.exp(-1))


@pytest.mark.parametrize("N", range(0, 7))
@pytest.mark.parametrize("offset", [0.0, 1.0, 2.0])
def test_kernel_moments(N, offset):
    k = build_kernel(N, offset)
    assert abs(k.mass - 1) < 1e-10
    for m in range(1, N + 1):
        assert abs(k.moment(m)) < 1e-8


def test_kernel_callable_matches_samples():
    k = build_kernel(4, 1.0)
    assert np.allclose(k(k.nodes), k.values)
    assert k(np.array([-0.5, 2.5])).tolist() == [0.0, 0.0]


def test_kernel_failures():
    with pytest.raises(ValueError):
        build_kernel(7)
    with pytest.raises(KernelConstructionFailed):
        build_kernel(6, offset=20.0)


def test_layers():
    assert layer_count(3.0) == 3 and layer_count(2.5) == 3 and layer_count(0) == 0
    w = layer_widths(3.0, 1.0)
    assert w.shape == (4,) and np.all(np.diff(w) < 0)
    qbar = np.linspace(1e-6, 1, 200)
    th = layer_weights(qbar, 3.0)
    assert np.allclose(th.sum(axis=1), 1.0) and th.min() >= 0
    # deepest layer at the boundary, top layer in the bulk
    assert th[0, -1] == 1.0 and th[-1, 0] == 1.0


def test_layer_decomposition_covers_interior():
    s = parabola_state(401)
    dec = layer_decomposition(s, 3.0)
    covered = np.sort(np.concatenate(list(dec.layers.values())))
    assert np.array_equal(covered, np.arange(1, 400))


def test_mollify_reproduces_cubics():
    s = parabola_state(801)
    x = s.x
    f = 1 - 2 * x + 3 * x**2 - x**3
    out = mollify(f, s, 3.0, x)
    assert np.max(np.abs(out - f)) < 1e-11


def test_mollify_constant_exact():
    s = parabola_state(101)
    out = mollify(np.full(101, 2.5), s, 6.0, s.x)
    assert np.all(out == 2.5)


def test_mollify_multi_field():
    s = parabola_state(801)
    F = np.stack([np.sin(s.x), np.cos(s.x)], axis=1)
    out = mollify(F, s, 3.0, s.x)
    assert np.allclose(out[:, 0], mollify(F[:, 0], s, 3.0, s.x))


def test_mollify_errors():
    s = parabola_state(101)
    with pytest.raises(ResolutionTooCoarse):
        mollify(np.sin(s.x), s, 6.0, s.x)
    with pytest.raises(DomainTooNarrow):
        mollify(np.sin(s.x), s, 0.0, s.x)
    with pytest.raises(DomainTooNarrow):
        mollify(np.sin(s.x), s, 2.0, np.array([1.5]))


def test_regularize_field_enlarged():
    s = parabola_state(801)
    nodes, inner = enlarged_nodes(s, 3.0)
    assert nodes[0] < -1 and nodes[-1] > 1
    assert np.array_equal(nodes[inner], s.x)
    r = regularize_field(np.sin(s.x), s, 3.0)
    assert r.on_domain().shape == (801,)
    assert np.max(np.abs(r.values - np.sin(r.nodes))) < 1e-3
    with pytest.raises(ValueError):
        regularize_field(np.sin(s.x), s, -1.0)


def test_study_polynomial_exact():
    s = parabola_state(1601)
    res = regularization_study(s.x**2, s, 1, range(2, 6))
    assert res.status == "ExactlyReproduced"
    assert res.to_csv().splitlines()[-1].startswith("# {")


def test_study_rates():
    s = parabola_state(1601)
    f = s.q * np.sin(5 * s.x)
    res = regularization_study(f, s, 1, range(2, 7))
    assert res.error_slope <= -1.6 and res.diff_slope <= -1.6
    assert np.isfinite(smoothing_constant(f, s, 3.0))


def test_kernel_set_build():
    ks = KernelSet.build(2)
    assert ks.centered.offset == 0 and ks.shifted.offset == 1 and ks.exterior.offset == 2
    assert default_kernels(2) is default_kernels(2)


@settings(max_examples=20, deadline=None)
@given(a=st.floats(-3, 3), b=st.floats(-3, 3), h=st.floats(1.0, 3.5))
def test_mollify_linear(a, b, h):
    s = parabola_state(401)
    f, g = np.sin(3 * s.x), np.exp(s.x)
    lhs = mollify(a * f + b * g, s, h, s.x)
    rhs = a * mollify(f, s, h, s.x) + b * mollify(g, s, h, s.x)
    assert np.allclose(lhs, rhs, atol=1e-10 * (1 + abs(a) + abs(b)))
