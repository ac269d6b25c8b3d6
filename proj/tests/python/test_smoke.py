import math
import os
from pathlib import Path

import numpy as np
import pytest

import racegp

SOURCE = Path(os.environ.get("RACEGP_SOURCE_DIR", Path(__file__).resolve().parents[2]))
CONFIG = SOURCE / "config" / "default.yaml"


def small_config(tmp_path, budget=15):
    text = (
        f"tracks:\n  circuit_a: {SOURCE / 'data/tracks/circuit_a.csv'}\n"
        f"gp:\n  budget: {budget}\n  restarts: 2\n"
    )
    return racegp.parse_config(text, str(tmp_path))


def test_error_sparsity_on_one_step():
    s = racegp.VehicleState(v=3.0, delta=0.1, omega=0.5, beta=0.02)
    u = racegp.ControlInput(a_long=1.0, delta_v=0.3)
    dyn = racegp.integrate_step("dynamic", s, u)
    ekin = racegp.integrate_step("ekin", s, u)
    assert dyn.to_list()[:5] == ekin.to_list()[:5]
    assert dyn.omega != ekin.omega


def test_unknown_model_is_config_error():
    with pytest.raises(racegp.ConfigError):
        racegp.integrate_step("bicycle", racegp.VehicleState(), racegp.ControlInput())
    assert issubclass(racegp.ConfigError, racegp.Error)


def test_gp_matches_numpy_posterior():
    rng = np.random.default_rng(3)
    X = rng.normal(size=(20, 4))
    y = np.sin(X[:, 0])
    Xs = rng.normal(size=(5, 4))
    k = racegp.Kernel.combo("RQ+LIN")
    m = racegp.gp_fit(X, y, k, 0.01)
    mean, var = racegp.gp_predict(m, Xs)

    K = k.gram(X) + 0.01 * np.eye(len(X))
    Ks = k.gram(X, Xs)
    kss = np.diag(k.gram(Xs))
    np.testing.assert_allclose(mean, Ks.T @ np.linalg.solve(K, y), rtol=1e-8, atol=1e-10)
    expected_var = kss - np.einsum("ij,ij->j", Ks, np.linalg.solve(K, Ks)) + 0.01
    np.testing.assert_allclose(var, expected_var, rtol=1e-8, atol=1e-10)
    assert math.isfinite(m.log_marginal_likelihood)


def test_metrics():
    y = np.array([1.0, 2.0, 3.0, 4.0])
    assert racegp.rmse(y, y) == 0.0
    assert racegp.r_squared(y, y) == 1.0
    assert racegp.r_squared(y, np.full(4, y.mean())) == pytest.approx(0.0)


def test_track_and_sectors():
    track = racegp.load_track(str(SOURCE / "data/tracks/circuit_a.csv"))
    line = racegp.build_refline(track)
    assert line.length > 100.0
    pts = line.points
    assert pts.shape[1] == 6 and len(line) == pts.shape[0]
    secs = racegp.sectors(line)
    assert sorted(s["class"] for s in secs) == ["curvy", "mild", "straight"]
    assert secs[2]["s_end"] - secs[0]["s_start"] == pytest.approx(line.length)


def test_simulate_fit_and_correct(tmp_path):
    cfg = small_config(tmp_path)
    train, test = racegp.simulate(cfg, "circuit_a", "ra-noncap", seed=0)
    assert len(train) > 1000 and len(test) > 1000
    arr = test.to_array()
    assert arr.shape == (len(test), 16)

    errs = racegp.compute_errors(train, cfg.vehicle)
    model = racegp.fit_error_model(errs, "RQ+LIN", "third", budget=15, restarts=2)
    assert model.combo == "RQ+LIN"

    pred = racegp.predict_errors(model, racegp.feature_matrix(racegp.compute_errors(test, cfg.vehicle)))
    assert pred["mean_omega"].shape == (len(test),)

    x0 = racegp.VehicleState(*arr[0, :7])
    inputs = [racegp.ControlInput(a, d) for a, d in arr[:60, 7:9]]
    raw = racegp.rollout(x0, inputs, cfg.vehicle)
    corr = racegp.rollout(x0, inputs, cfg.vehicle, model)
    assert len(raw) == len(corr) == 61
    assert raw[1].x == corr[1].x and raw[1].omega != corr[1].omega

    path = tmp_path / "model.json"
    racegp.save_error_model(model, str(path))
    again = racegp.load_error_model(str(path))
    s = racegp.corrected_step(x0, inputs[0], cfg.vehicle, again)
    assert s == racegp.corrected_step(x0, inputs[0], cfg.vehicle, model)


def test_run_matrix(tmp_path):
    cfg = small_config(tmp_path, budget=10)
    recs = racegp.run_matrix(cfg, tracks=["circuit_a"], scenarios=["ce-cap"], sizes=["third"],
                             combos=["RQ+LIN", "MAT*RBF"])
    assert sorted(r["combo"] for r in recs) == ["MAT*RBF", "RQ+LIN"]
    for r in recs:
        assert r["status"] == "ok"
        assert -1.0 < r["r2_mean"] <= 1.0
    assert set(racegp.study_combos()) >= {r["combo"] for r in recs}


def test_shipped_config_loads():
    cfg = racegp.load_config(str(CONFIG))
    assert cfg.tracks == ["circuit_a", "circuit_b", "circuit_c"]
    assert len(cfg.hash()) == 16
