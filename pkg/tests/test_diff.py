import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vacuum_euler.diff import ancillary_a, common_grid, distance_functionals, stability_ratio
from vacuum_euler.errors import DisjointDomains, TimeGridMismatch
from vacuum_euler.oracle import AffineOrbit, affine_state
from vacuum_euler.state import FluidState, Grid
from vacuum_euler.stepper import StepConfig, Trajectory, run


def test_ancillary_values():
    assert ancillary_a(1.0, 0.5) == 1.0
    assert ancillary_a(1.0, 0.95) == 0.0
    assert ancillary_a(0.0, 0.0) == 0.0
    assert 0 < ancillary_a(1.0, 0.85) < 1
    with pytest.raises(ValueError):
        ancillary_a(-1.0, 0.0)


def test_identical_states_zero(affine):
    rep = distance_functionals(affine, affine)
    assert rep.d_full == 0 and rep.d_reduced == 0


def test_distance_b_perturbation():
    s1 = affine_state(AffineOrbit(0, 0.5, 1.0), 401)
    s2 = affine_state(AffineOrbit(0, 0.5005, 1.0), 401)
    rep = distance_functionals(s1, s2)
    # alpha = 1: int (q1 - q2)^2 = (5e-4)^2 * 16/15
    assert rep.d_full == pytest.approx(2.5e-7 * 16 / 15, rel=1e-4)
    assert rep.d_reduced <= rep.d_full


def test_disjoint():
    g1, g2 = Grid.uniform(0, 1, 11), Grid.uniform(2, 3, 11)
    q = np.sin(np.pi * np.linspace(0, 1, 11))
    q[0] = q[-1] = 0
    s1 = FluidState(g1, q, np.zeros(11), np.ones(11))
    s2 = FluidState(g2, q, np.zeros(11), np.ones(11))
    with pytest.raises(DisjointDomains):
        common_grid(s1, s2)


def test_stability_modes(affine):
    cfg = StepConfig(1e-3)
    t1 = run(affine, 0.005, cfg, reporter=None)
    rep = stability_ratio(t1, t1)
    assert rep.mode == "AbsoluteMode" and rep.ratio is None
    other = affine_state(AffineOrbit(0, 0.5005, 1.0), 401)
    t2 = run(other, 0.005, cfg, reporter=None)
    rep = stability_ratio(t1, t2)
    assert rep.mode == "Relative" and rep.ratio >= 1.0
    assert json.loads(rep.to_json())["mode"] == "Relative"
    assert rep.to_csv().startswith("t,d_full,d_reduced\n")
    short = Trajectory(t2.snapshots[:-1], [])
    with pytest.raises(TimeGridMismatch):
        stability_ratio(t1, short)


@settings(max_examples=200, deadline=None)
@given(mu=st.floats(1e-6, 1e6), nu=st.floats(-1e6, 1e6), tau=st.floats(1e-3, 1e3))
def test_ancillary_homogeneous(mu, nu, tau):
    assert abs(ancillary_a(tau * mu, tau * nu) - ancillary_a(mu, nu)) <= 1e-12


@settings(max_examples=30, deadline=None)
@given(db=st.floats(-0.2, 0.2), dv=st.floats(-0.3, 0.3))
def test_reduced_below_full(db, dv):
    s1 = affine_state(AffineOrbit(0, 0.5, 1.0), 101)
    s2 = affine_state(AffineOrbit(dv, 0.5 + db, 1.0 + db), 101)
    rep = distance_functionals(s1, s2)
    assert 0 <= rep.d_reduced <= rep.d_full
