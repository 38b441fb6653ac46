import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from vacuum_euler.cli import main
from vacuum_euler.errors import ConfigError
from vacuum_euler.harness import (
    EXIT_CHECK, EXIT_CONFIG, EXIT_OK, EXIT_VIOLATION, initial_state, parse_config, run_scenario,
)
from vacuum_euler.state import snapshot_to_json


def test_defaults():
    cfg = parse_config("{}")
    assert cfg.scenario == "affine" and cfg.params.beta == 1.0
    assert cfg["step"]["c_min"] == 1e-3 and cfg["step"]["eps"] is None
    assert cfg.node_count == 401


@pytest.mark.parametrize("doc, path", [
    ({"bogus": 1}, "bogus"),
    ({"params": {"beta": -1}}, "params.beta"),
    ({"params": {"gamma": 1}}, "params.gamma"),
    ({"node_count": 10}, "node_count"),
    ({"node_count": 100.5}, "node_count"),
    ({"step": {"eps": "big"}}, "step.eps"),
    ({"initial": {"phase": "sometimes"}}, "initial.phase"),
    ({"scenario": "custom_snapshot"}, "initial.snapshot"),
    ({"convergence": {"ratio_range": [2.3, 1.7]}}, "convergence.ratio_range"),
    ({"params": 3}, "params"),
])
def test_config_errors_carry_path(doc, path):
    with pytest.raises(ConfigError) as info:
        parse_config(json.dumps(doc))
    assert info.value.path == path


def test_malformed_json():
    with pytest.raises(ConfigError):
        parse_config("{not json")


_cfg_docs = st.fixed_dictionaries({}, optional={
    "scenario": st.sampled_from(["affine", "perturbed_affine"]),
    "params": st.fixed_dictionaries({}, optional={"beta": st.floats(0.1, 5), "eps_star": st.floats(0.001, 0.4)}),
    "T": st.floats(0, 1),
    "node_count": st.integers(64, 2000),
    "seed": st.integers(0, 2**31),
    "step": st.fixed_dictionaries({}, optional={
        "eps": st.one_of(st.none(), st.floats(1e-6, 1e-2)), "cfl_safety": st.floats(0.01, 1.0)}),
    "initial": st.fixed_dictionaries({}, optional={
        "phase": st.one_of(st.just("random"), st.floats(-10, 10)), "amplitude": st.floats(-0.9, 0.9)}),
})


@settings(max_examples=60, deadline=None)
@given(doc=_cfg_docs)
def test_config_round_trip(doc):
    cfg = parse_config(json.dumps(doc))
    again = parse_config(cfg.to_json())
    assert again == cfg
    assert again.to_json() == cfg.to_json()


def _cfg(tmp_path, **doc):
    doc.setdefault("outputs", str(tmp_path / "out"))
    return parse_config(json.dumps(doc))


def test_simulate_zero_time(tmp_path):
    code, summary = run_scenario(_cfg(tmp_path, T=0.0))
    assert code == EXIT_OK
    assert summary["e_phys_drift"] == 0 and summary["entropy_drift"] == 0
    lines = (tmp_path / "out" / "snapshots.jsonl").read_text().splitlines()
    assert len(lines) == 1


def test_simulate_outputs(tmp_path):
    code, summary = run_scenario(_cfg(tmp_path, T=0.01))
    assert code == EXIT_OK
    out = tmp_path / "out"
    assert json.loads((out / "summary.json").read_text())["violation"] is None
    assert (out / "energy.csv").read_text().startswith("t,e_phys,entropy_mass")
    assert summary["e_phys_drift"] <= 1e-2


def test_violation_exit(tmp_path):
    code, summary = run_scenario(_cfg(tmp_path, T=0.01, step={"c_min": 10.0}))
    assert code == EXIT_VIOLATION
    rec = json.loads((tmp_path / "out" / "summary.json").read_text())["violation"]
    assert set(rec) == {"criterion", "time", "value"}


def test_check_failure_exit(tmp_path):
    code, _ = run_scenario(_cfg(tmp_path, T=0.01, checks={"e_phys_drift": 1e-12}))
    assert code == EXIT_CHECK


def test_perturbed_random_phase_seeded(tmp_path):
    a = initial_state(_cfg(tmp_path, scenario="perturbed_affine", initial={"phase": "random"}, seed=3))
    b = initial_state(_cfg(tmp_path, scenario="perturbed_affine", initial={"phase": "random"}, seed=3))
    c = initial_state(_cfg(tmp_path, scenario="perturbed_affine", initial={"phase": "random"}, seed=4))
    assert a == b and a != c


def test_custom_snapshot(tmp_path, affine):
    snap = tmp_path / "snap.jsonl"
    snap.write_text(snapshot_to_json(affine) + "\n")
    cfg = _cfg(tmp_path, scenario="custom_snapshot", initial={"snapshot": str(snap)}, node_count=201)
    st0 = initial_state(cfg)
    assert st0.grid.n == 201 and st0.grid.left == -1.0


def test_oracle_outputs(tmp_path):
    code, summary = run_scenario(_cfg(tmp_path, T=0.2), "oracle")
    assert code == EXIT_OK and summary["invariant_drift"] < 1e-10
    assert (tmp_path / "out" / "oracle.csv").read_text().startswith("t,a,b,r,")


def test_cli_exit_codes(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"params": {"beta": 0}}')
    assert main(["simulate", "--config", str(bad)]) == EXIT_CONFIG
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG
    good = tmp_path / "good.json"
    good.write_text('{"T": 0.005}')
    assert main(["simulate", "--config", str(good), "--out", str(tmp_path / "o"), "--eps", "1e-3"]) == EXIT_OK
    assert json.loads(capsys.readouterr().out.splitlines()[-1])["eps"] == 1e-3


def test_cli_deterministic(tmp_path):
    cfgp = tmp_path / "c.json"
    cfgp.write_text('{"T": 0.01, "scenario": "perturbed_affine"}')
    for d in ("a", "b"):
        assert main(["simulate", "--config", str(cfgp), "--out", str(tmp_path / d)]) == EXIT_OK
    for name in ("energy.csv", "snapshots.jsonl", "summary.json"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


@pytest.mark.parametrize("command, doc, key", [
    ("convergence", {"T": 0.02, "convergence": {"eps_list": [2e-3, 1e-3]}}, "ratios"),
    ("compare", {"T": 0.01, "step": {"eps": 1e-3}}, "ratio"),
    ("linearize", {"T": 0.01, "step": {"eps": 1e-3}}, "c_fit"),
    ("regstudy", {"regstudy": {"nodes": 801, "h_max": 5}}, "error_slope"),
    ("interp-check", {"interp": {"nodes": 200}}, "max_ratio"),
])
def test_study_subcommands(tmp_path, command, doc, key):
    code, summary = run_scenario(_cfg(tmp_path, **doc), command)
    assert code == EXIT_OK, summary
    assert key in summary
    assert json.loads((tmp_path / "out" / "summary.json").read_text())["checks_passed"] is True


def test_convergence_needs_oracle(tmp_path):
    with pytest.raises(ConfigError):
        run_scenario(_cfg(tmp_path, scenario="perturbed_affine"), "convergence")
