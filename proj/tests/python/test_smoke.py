import math
import os
import tempfile

import pytest

import bellvis

INV_SQRT2 = 0.7071067811865476

CHSH_FLAT = [
    math.pi / 2, 0.0,
    math.pi / 2, math.pi / 2,
    math.pi / 2, -math.pi / 4,
    math.pi / 2, math.pi / 4,
]


def test_experiment_config():
    cfg = bellvis.ExperimentConfig.two_setting_qubits(3)
    assert cfg.observers == 3
    assert cfg.outcomes == 2
    assert cfg.observables == [2, 2, 2]
    assert cfg.reduced_row_count == 27
    assert cfg.full_row_count == 64
    # one deterministic strategy per joint choice of responses: (2^2)^3
    assert cfg.assignment_count == 64


def test_ghz_state():
    ghz = bellvis.make_ghz(2)
    amps = ghz.amplitudes
    assert len(amps) == 4
    assert amps[0] == pytest.approx(INV_SQRT2)
    assert amps[3] == pytest.approx(INV_SQRT2)
    assert amps[1] == 0 and amps[2] == 0

    scaled = bellvis.PureState.normalized(2, [3 + 0j, 0j, 0j, 4 + 0j])
    assert abs(scaled.amplitudes[0]) == pytest.approx(0.6)
    assert abs(scaled.amplitudes[3]) == pytest.approx(0.8)


def test_outcome_probability():
    ghz = bellvis.make_ghz(2)
    z = bellvis.ObservableSetting(0.0, 0.0)
    assert bellvis.outcome_probability(ghz, [z, z], [0, 0]) == pytest.approx(0.5)
    assert bellvis.outcome_probability(ghz, [z, z], [0, 1]) == pytest.approx(0.0)


def test_critical_visibility_both_solvers():
    cfg = bellvis.ExperimentConfig.two_setting_qubits(2)
    ghz = bellvis.make_ghz(2)
    angles = bellvis.AngleVector.from_flat(cfg, CHSH_FLAT)
    assert len(angles.to_flat()) == 8

    exact = bellvis.critical_visibility(ghz, cfg, angles, solver="simplex")
    assert exact == pytest.approx(INV_SQRT2, abs=1e-9)

    iterative = bellvis.critical_visibility(ghz, cfg, angles, solver="ipm")
    assert iterative == pytest.approx(INV_SQRT2, abs=5e-4)


def test_minimize_small():
    cfg = bellvis.ExperimentConfig.two_setting_qubits(2)
    ghz = bellvis.make_ghz(2)
    result = bellvis.minimize_critical_visibility(
        ghz, cfg, solver="simplex", restarts=5, seed=1
    )
    assert result["best_value"] == pytest.approx(INV_SQRT2, abs=0.01)
    assert len(result["best_angles"]) == 8
    assert len(result["per_restart_values"]) == 5
    assert result["evaluations"] > 0


def test_export_mps_and_index_bytes():
    cfg = bellvis.ExperimentConfig.two_setting_qubits(2)
    ghz = bellvis.make_ghz(2)
    angles = bellvis.AngleVector.random(cfg, 7)

    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "chsh.mps")
        bellvis.export_mps(ghz, cfg, angles, path)
        with open(path) as f:
            text = f.read()
        assert "ROWS" in text and "ENDATA" in text

    assert bellvis.lp_index_bytes(ghz, cfg, angles) > 0


def test_error_mapping():
    cfg = bellvis.ExperimentConfig.two_setting_qubits(2)
    ghz = bellvis.make_ghz(2)
    angles = bellvis.AngleVector.random(cfg, 1)

    with pytest.raises(ValueError):
        bellvis.critical_visibility(ghz, cfg, angles, solver="bogus")
    with pytest.raises(ValueError):
        bellvis.PureState(2, [1 + 0j])  # four amplitudes expected
    with pytest.raises(ValueError):
        bellvis.AngleVector.from_flat(cfg, [0.0] * 7)
