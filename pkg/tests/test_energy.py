import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vacuum_euler.energy import (
    b_lin, compute_controls, conserved_quantities, cumulative_integral, energy_2k, energy_report,
    fit_gronwall_constant, gronwall_envelope, linear_energy,
)
from vacuum_euler.errors import InvalidHistory

from conftest import parabola_state


def test_conserved_affine(affine):
    e, m = conserved_quantities(affine)
    # q = (1 - x^2)/2: int q^2 = 4/15, int q = 2/3
    assert e == pytest.approx(4 / 15, rel=1e-5)
    assert m == pytest.approx(2 / 3, rel=1e-5)


def test_linear_energy_value(parabola):
    z = np.zeros_like(parabola.q)
    # 1/2 int q^0 q^2 = 8/15
    assert linear_energy(parabola.q, z, z, parabola) == pytest.approx(8 / 15, rel=1e-5)
    assert linear_energy(z, z, z, parabola) == 0.0


def test_energy_2k_parabola(parabola):
    e = energy_2k(parabola, 1)
    assert e.exact
    assert e.high == pytest.approx(56 / 15, rel=1e-4)  # int (4x^2 - 2)^2, O(dx^2)
    # low part: int q^2 + int q = 16/15 + 4/3
    assert e.low == pytest.approx(16 / 15 + 4 / 3, rel=1e-5)
    assert e.total == pytest.approx(e.high + e.low)
    assert not energy_2k(parabola, 2).exact


def test_controls_parabola(parabola):
    c = compute_controls(parabola)
    assert c.components["qx_sup"] == pytest.approx(2.0, rel=1e-9)
    assert c.components["vx_sup"] == 0 and c.components["sigmax_sup"] < 1e-12
    assert c.components["inv_sigma_sup"] == 1.0
    assert c.b_lin == pytest.approx(b_lin(parabola))
    assert c.b >= c.b_lin
    assert c.a_star > 0 and c.a_prime > 0


def test_energy_report_row(affine):
    rep = energy_report(affine)
    row = rep.csv_row()
    assert len(row) == len(rep.CSV_HEADER)
    assert row[0] == 0.0 and row[-1] == pytest.approx(1.0, rel=1e-9)


def test_cumulative_integral_and_errors():
    t = np.linspace(0, 1, 11)
    assert cumulative_integral(t, 2 * np.ones(11))[-1] == pytest.approx(2.0)
    with pytest.raises(InvalidHistory):
        cumulative_integral([0, 0.2, 0.1], [1, 1, 1])
    with pytest.raises(InvalidHistory):
        gronwall_envelope([], 1.0, 1.0)


def test_gronwall_fit_recovers_rate():
    t = np.linspace(0, 1, 21)
    b = 1 + t
    e = 3.0 * np.exp(0.7 * cumulative_integral(t, b))
    assert fit_gronwall_constant(t, e, b) == pytest.approx(0.7, rel=1e-12)
    assert fit_gronwall_constant(t, e, b, "lstsq") == pytest.approx(0.7, rel=1e-12)
    env = gronwall_envelope(list(zip(t, b)), 3.0, 0.7)
    assert np.allclose(env, e)
    with pytest.raises(ValueError):
        fit_gronwall_constant(t, e, b, "median")


@settings(max_examples=40, deadline=None)
@given(growth=st.lists(st.floats(-1, 1), min_size=3, max_size=30))
def test_envelope_dominates(growth):
    t = np.arange(len(growth), dtype=float) * 0.1
    b = np.ones_like(t)
    e = np.exp(np.cumsum(growth))
    e /= e[0]
    c = fit_gronwall_constant(t, e, b)
    env = gronwall_envelope(list(zip(t, b)), e[0], c)
    assert np.all(e <= env * (1 + 1e-12))
    assert c >= 0


@settings(max_examples=20, deadline=None)
@given(beta=st.floats(0.3, 4.0), amp=st.floats(0.0, 0.5))
def test_energies_nonnegative(beta, amp):
    s = parabola_state(201, beta, v=lambda x: amp * np.sin(x), sigma=lambda x: 1 + amp * np.cos(x))
    e, m = conserved_quantities(s)
    assert e > 0 and m > 0
    e2 = energy_2k(s, 1)
    assert e2.high >= 0 and e2.low > 0 and math.isfinite(e2.total)


def test_entropy_mass_scaling(affine):
    from vacuum_euler.state import scale_state

    tau, alpha = 2.0, affine.params.alpha
    m0 = conserved_quantities(affine)[1]
    m1 = conserved_quantities(scale_state(affine, tau))[1]
    assert m1 == pytest.approx(m0 * tau ** (-2 * alpha - 2), rel=1e-12)


def test_linear_energy_quadratic(parabola):
    x = parabola.x
    f = (np.sin(x), np.cos(x), x)
    e1 = linear_energy(*f, parabola)
    e2 = linear_energy(*(2 * g for g in f), parabola)
    assert e2 == 4 * e1
