import json
import math
import os
import tempfile

import numpy as np
import pytest

import qflow


def test_version():
    assert qflow.__version__ == "0.1.0"


def test_gaussian_center_value():
    m = qflow.gaussian_packet(x0=0.0, v=0.0, sigma0=1.0)
    psi, dpsi, _ = qflow.eval_model(m, 0.0, 0.0)
    assert psi.real == pytest.approx((2 * math.pi) ** -0.25, rel=1e-13)
    assert abs(dpsi) < 1e-14


def test_spreading_and_critical_speed():
    assert qflow.spreading_ratio(1.0, 0.0) == 1.0
    assert qflow.spreading_ratio(1.0, 2.0) == pytest.approx(math.sqrt(2))
    v, ratio = qflow.critical_speed(20.0, 1.0)
    assert ratio == pytest.approx(44.0)
    assert v == pytest.approx(22.0)


def test_hydro_fields_of_plane_wave():
    m = qflow.plane_wave(1.7)
    h = qflow.hydro_fields(m, 0.3, 0.2)
    assert h["v"] == pytest.approx(1.7, rel=1e-12)
    assert abs(h["Q"]) < 1e-12


def test_two_slit_ensemble_stays_mirrored():
    m = qflow.superposition([(-5.0, 0.0, 1.0, 1.0), (5.0, 0.0, 1.0, 1.0)])
    times, paths, aborted = qflow.run_ensemble(
        m, n_traj=16, sampling="uniform_support", support=(-8.0, 8.0),
        seed=7, save_times=list(np.linspace(0.0, 6.0, 13)))
    assert paths.shape == (16, 13)
    assert not any(aborted)
    signs = np.sign(paths[:, 0])
    assert np.all(np.sign(paths) * signs[:, None] >= 0)


def test_carpet_row_normalization():
    m = qflow.talbot(d=1.0, sigma0=0.125)
    rho = qflow.density_carpet(m, (-0.5, 0.5), 101, (0.0, 0.3), 7,
                               per_row_max=True)
    assert rho.shape == (7, 101)
    assert np.allclose(rho.max(axis=1), 1.0)


def test_momentum_ladder_fraction():
    n = 11
    m = qflow.nslit(n_slits=n, d=1.0, sigma0=0.1)
    t_far = qflow.ladder_far_time(n, 1.0)
    span = 1.5 * 2 * math.pi * t_far
    xs = np.linspace(-span, span, 801)
    _, fraction = qflow.momentum_ladder(m, xs, t_far, 1.0)
    assert 0.2 < fraction < 0.8


def test_fractal_dimension_power_law():
    K = [16, 32, 64, 128, 256]
    L = [math.sqrt(k) for k in K]
    est = qflow.fractal_dimension(K, L)
    assert est["D_f"] == pytest.approx(1.5, abs=1e-12)


def test_well_geometry_identity():
    x_min, v0 = qflow.well_geometry(p=-2.0, sigma0=1.0, x0=-10.0, t=0.0)
    assert x_min == pytest.approx(math.pi / (2 * -2.0))
    assert v0 * x_min**2 == pytest.approx(2.0)


def test_run_scenario_preset(tmp_path):
    out = qflow.run_scenario("toymodel", out_dir=str(tmp_path / "toy"))
    assert out["all_passed"]
    assert "toymodel.csv" in out["artifacts"]
    checks = json.load(open(os.path.join(out["output_dir"], "checks.json")))
    assert checks["all_passed"]


def test_bad_config_raises():
    with pytest.raises(qflow.ValidationError):
        qflow.validate_config(json.dumps(
            {"scenario": "two_slit", "two_slit": {"sigma_zero": 1.0}}))


if __name__ == "__main__":
    import sys
    sys.exit(pytest.main([__file__, "-q"]))
