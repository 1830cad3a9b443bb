import json
import math
from pathlib import Path

import numpy as np
import pytest

import tlnp

FIXTURES = Path(__file__).resolve().parents[2] / "tests" / "fixtures"

SMALL = {
    "data": {"type": "gaussian", "dim": 2, "mean_target_abnormal": [1.5], "mean_source_abnormal": [1.0],
             "n_normal": 300, "n_target": 30, "n_source": 120, "n_normal_test": 300, "n_target_test": 200},
    "methods": ["tlnp", "only_target_np"],
    "alpha": 0.1,
    "epsilon0": 0.02,
    "runs": 1,
    "master_seed": 3,
    "model": {"kind": "linear"},
    "train": {"epochs": 40, "learning_rate": 0.05},
    "tlnp": {"lambda_s_grid": [0, 1, 5], "min_successes": 1, "target_success_count": 3},
}


@pytest.fixture(scope="module")
def bundle():
    spec = dict(SMALL["data"], seed=11)
    spec.pop("type")
    return tlnp.gen_gaussian(spec)


def test_losses():
    assert tlnp.eval_loss("exponential", 0.0) == pytest.approx(1.0)
    assert tlnp.eval_loss("hinge", -2.0) == 0.0
    assert tlnp.eval_loss_deriv("exponential", 1.0) == pytest.approx(math.e)
    assert tlnp.eval_loss("exponential", 100.0) == pytest.approx(math.exp(20.0))
    with pytest.raises(tlnp.ConfigError):
        tlnp.eval_loss("nope", 0.0)


def test_model_roundtrip_and_forward():
    assert tlnp.parameter_count("mlp2", 124, 62) == 7813
    m = tlnp.make_model("linear", 2, 0, np.array([1.0, -2.0, 0.5]))
    X = np.array([[1.0, 0.0], [0.0, 1.0]])
    np.testing.assert_allclose(m.forward(X), [1.5, -1.5])
    np.testing.assert_array_equal(m.predict(X), [1, -1])
    np.testing.assert_allclose(m.gradient(np.array([3.0, 4.0])), [3.0, 4.0, 1.0])
    again = tlnp.Model.from_json(m.to_json())
    np.testing.assert_array_equal(again.params, m.params)
    with pytest.raises(tlnp.ConfigError):
        m.params = np.zeros(5)


def test_risks():
    m = tlnp.make_model("linear", 1, 0, np.array([1.0, 0.0]))
    normal = np.array([[-1.0], [-2.0], [0.5], [-3.0]])
    abnormal = np.array([[1.0], [-0.5]])
    assert tlnp.type1_error(m, normal) == pytest.approx(0.25)
    assert tlnp.type2_error(m, abnormal) == pytest.approx(0.5)
    with pytest.raises(tlnp.UndefinedError):
        tlnp.type1_error(m, np.zeros((0, 1)))


def test_gen_gaussian_shapes(bundle):
    assert bundle["normal_train"].shape == (300, 2)
    assert bundle["target_train"].shape == (30, 2)
    assert bundle["target_test"].shape == (200, 2)
    assert bundle["target_train"].mean() > bundle["normal_train"].mean()


def test_train_and_fit(bundle):
    cfg = {k: SMALL[k] for k in ("alpha", "epsilon0", "model", "train", "tlnp")}
    model = tlnp.train(bundle["normal_train"], bundle["target_train"], bundle["source_train"],
                       lambda_s=1.0, lambda_0=1.0, config=cfg)
    assert model.kind == "linear" and len(model.params) == 3

    out = tlnp.fit("tlnp", bundle["normal_train"], bundle["target_train"], bundle["source_train"], cfg)
    assert out["train_type1"] <= 0.1 + 0.02 / 2 + 1e-12
    assert out["lambda_s"] in (0.0, 1.0, 5.0)
    assert out["audit"] is not None
    assert tlnp.type1_error(out["model"], bundle["normal_test"]) < 0.25

    base = tlnp.fit("only_target_np", bundle["normal_train"], bundle["target_train"], None, cfg)
    assert base["lambda_s"] == 0.0
    with pytest.raises(tlnp.ConfigError):
        tlnp.fit("bogus", bundle["normal_train"], bundle["target_train"])


def test_oracle_solvers():
    fx = json.loads((FIXTURES / "oracle_small.json").read_text())
    assert fx["alpha"] == 0.3
    t1 = [0.1, 0.2, 0.5, 0.05]
    tg = [0.9, 0.4, 0.1, 0.8]
    src = [0.3, 0.2, 0.1, 0.5]
    assert tlnp.solve_target_hat(t1, tg, 0.3, 0.02) == 1
    assert tlnp.solve_procedure8(t1, tg, src, 0.3, 0.02, 1.0, 100) in (0, 1, 3)
    with pytest.raises(tlnp.FeasibilityError):
        tlnp.solve_target_hat([0.9], [0.1], 0.1, 0.0)


def test_run_experiment_and_hash():
    report = tlnp.run_experiment(SMALL)
    methods = {a["method"] for a in report["aggregates"]}
    assert methods == {"tlnp", "only_target_np"}
    assert report["config_hash"] == tlnp.config_hash(SMALL)
    assert tlnp.config_hash(SMALL) == tlnp.config_hash(dict(SMALL, workers=3))
    with pytest.raises(tlnp.ConfigError):
        tlnp.config_hash(dict(SMALL, c_tilde=1.0))


def test_ingest_csv():
    res = tlnp.ingest_csv({"path": FIXTURES / "synthetic_weather.csv", "label_column": "precipitation",
                          "feature_columns": ["temperature", "pressure", "humidity", "wind_speed"]})
    assert res["total_rows"] == 400
    assert res["dropped_missing"] == 3
    assert res["abnormal_rows"] == 19
