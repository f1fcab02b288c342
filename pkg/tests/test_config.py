"""Scenario config parsing, validation diagnostics, grid construction."""

import json

import numpy as np
import pytest

from quadmode import ConfigError
from quadmode.config import (
    TOLERANCE_DEFAULTS,
    build_grid,
    bundled_scenarios,
    load_config,
    parse_config,
)

BASE = {
    "name": "t",
    "coefficients": {"preset": "static_oscillator"},
    "grid": {"t_max": 10.0, "dt": 0.05},
}


def with_(**over):
    raw = json.loads(json.dumps(BASE))
    raw.update(over)
    return raw


def test_bundled_gallery_names():
    names = set(bundled_scenarios())
    assert names == {
        "static_oscillator", "squeezed_vacuum", "caldirola_kanai",
        "driven_oscillator", "parametric_modulation", "lossy_medium",
        "noisy_lossy_medium",
    }


def test_minimal_config_defaults():
    sc = parse_config(BASE)
    assert sc.n == 0
    assert sc.init.beta0 == 1.0 and sc.init.alpha0 == 0.0
    assert sc.noise is None
    assert sc.tolerances == TOLERANCE_DEFAULTS
    assert sc.solver["method"] == "RK45"
    cs = sc.build_coefficients()
    assert cs.a(3.0) == 0.5


def test_initial_state_requires_beta0():
    with pytest.raises(ConfigError) as err:
        parse_config(with_(initial_state={"alpha0": 0.1}))
    assert err.value.field == "initial_state.beta0"


def test_unknown_keys_rejected_everywhere():
    with pytest.raises(ConfigError) as err:
        parse_config(with_(solvr={}))
    assert "solvr" in str(err.value)
    with pytest.raises(ConfigError):
        parse_config(with_(grid={"t_max": 1.0, "dt": 0.1, "spacing": 1}))
    with pytest.raises(ConfigError):
        parse_config(with_(initial_state={"beta0": 1.0, "beta1": 2.0}))


def test_exactly_one_coefficient_source():
    raw = with_()
    raw["coefficients"] = {
        "preset": "static_oscillator",
        "medium": {"xi": {"kind": "constant", "value": 1.0},
                   "eta": {"kind": "constant", "value": 1.0},
                   "chi": {"kind": "constant", "value": 0.0}},
    }
    with pytest.raises(ConfigError) as err:
        parse_config(raw)
    assert err.value.field == "coefficients"
    raw["coefficients"] = {}
    with pytest.raises(ConfigError):
        parse_config(raw)


def test_noise_needs_medium_source():
    raw = with_(noise={"target": "chi", "model": "ornstein_uhlenbeck",
                       "amplitude": 0.01, "correlation_time": 1.0})
    with pytest.raises(ConfigError) as err:
        parse_config(raw)
    assert err.value.field == "noise"


def test_grid_validation():
    for bad in ({}, {"t_max": -1.0, "dt": 0.1}, {"t_max": 1.0, "dt": 2.0},
                {"t_max": 1.0}, {"t_max": 1.0, "dt": 0.1, "adaptive": True}):
        with pytest.raises(ConfigError):
            parse_config(with_(grid=bad))


def test_uniform_grid_covers_window():
    sc = parse_config(BASE)
    grid = build_grid(sc)
    assert grid[0] == 0.0 and grid[-1] == 10.0
    assert grid.size == 201
    assert np.allclose(np.diff(grid), 0.05)


def test_adaptive_grid():
    sc = parse_config(with_(grid={"t_max": 7.0, "adaptive": True}))
    grid = build_grid(sc)
    assert grid[0] == 0.0 and grid[-1] == 7.0
    assert np.all(np.diff(grid) > 0)
    assert grid.size > 10


def test_table_file_source(tmp_path):
    t = np.linspace(0.0, 5.0, 101)
    rows = np.column_stack([t, np.full_like(t, 0.5), 0.5 + 0.1 * np.sin(t),
                            np.zeros_like(t), np.zeros_like(t),
                            np.zeros_like(t), np.zeros_like(t)])
    path = tmp_path / "coeffs.csv"
    np.savetxt(path, rows, delimiter=",", header="t,a,b,c,d,f,g", comments="")
    cfg = tmp_path / "scenario.json"
    cfg.write_text(json.dumps({
        "name": "tabled",
        "coefficients": {"table_file": "coeffs.csv"},
        "grid": {"t_max": 5.0, "dt": 0.1},
    }))
    sc = load_config(cfg)
    cs = sc.build_coefficients()
    assert cs.a(1.0) == pytest.approx(0.5)
    assert cs.b(2.0) == pytest.approx(0.5 + 0.1 * np.sin(2.0), abs=1e-9)
    assert not cs.driven  # all-zero columns collapse to exact zeros

    cfg2 = tmp_path / "scenario2.json"
    cfg2.write_text(json.dumps({
        "name": "tabled2",
        "coefficients": {"table_file": "coeffs.csv"},
        "grid": {"t_max": 8.0, "dt": 0.1},
    }))
    with pytest.raises(ConfigError) as err:
        load_config(cfg2)
    assert err.value.field == "grid.t_max"


def test_table_file_header_checked(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("t,a,b\n0,1,1\n1,1,1\n")
    with pytest.raises(ConfigError) as err:
        parse_config({"name": "x", "coefficients": {"table_file": str(path)},
                      "grid": {"t_max": 1.0, "dt": 0.1}}, base_dir=tmp_path)
    assert err.value.field == "coefficients.table_file"


def test_medium_block_parsed():
    raw = with_()
    raw["coefficients"] = {"medium": {
        "xi": {"kind": "constant", "value": 1.0},
        "eta": {"kind": "sinusoid", "offset": 1.0, "amplitude": 0.2, "frequency": 1.0},
        "chi": {"kind": "constant", "value": 0.1},
        "upsilon": 2.0,
        "field_scale_varpi": 3.0,
    }}
    sc = parse_config(raw)
    assert sc.profile.upsilon == 2.0
    assert sc.profile.field_scale_varpi == 3.0
    cs = sc.build_coefficients(10.0)
    assert cs.medium is sc.profile
    # 4 a b = upsilon^2 / (xi eta) pointwise
    ups2 = 4.0 * cs.a(2.5) * cs.b(2.5) * sc.profile.xi(2.5) * sc.profile.eta(2.5)
    assert ups2 == pytest.approx(4.0, rel=1e-9)


def test_solver_and_tolerance_overrides():
    sc = parse_config(with_(solver={"method": "DOP853", "rtol": 1e-11},
                            tolerances={"wronskian": 1e-6}))
    assert sc.solver["method"] == "DOP853"
    assert sc.solver["rtol"] == 1e-11
    assert sc.solver["atol"] == 1e-12
    assert sc.tolerances["wronskian"] == 1e-6
    assert sc.tolerances["commutator"] == TOLERANCE_DEFAULTS["commutator"]
    with pytest.raises(ConfigError):
        parse_config(with_(solver={"method": "Euler"}))
    with pytest.raises(ConfigError):
        parse_config(with_(tolerances={"wronskian": -1.0}))


def test_missing_file_and_bad_json(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{\"name\": }")
    with pytest.raises(ConfigError) as err:
        load_config(bad)
    assert "line" in str(err.value)
