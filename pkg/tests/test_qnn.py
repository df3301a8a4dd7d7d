import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from oxqnn.circuits import AnsatzSpec, EncoderSpec
from oxqnn.errors import InvalidArgumentError
from oxqnn.features import FeatureRecord, Scaler, fit_scaler
from oxqnn.powell import OptimizerSettings
from oxqnn.qnn import (
    CircuitRegressor, Decoder, QnnModel, init_params, mse_cost, predict, predict_batch, predict_via_circuit, train,
)

IDENTITY_SCALER = Scaler((0.0,) * 5, (1.0,) * 5, (1.0,) * 5)


def model(layout="5x", angle_map="arctan", depth=1, entangler="linear", gate="CX", params=None, scaler=IDENTITY_SCALER):
    width = 5 if layout == "5x" else 10
    spec = AnsatzSpec(width, depth, entangler, gate)
    if params is None:
        params = np.zeros(spec.parameter_count)
    decoder = Decoder.Z4 if width == 5 else Decoder.Z4_PLUS_Z9
    return QnnModel(EncoderSpec(layout, angle_map), spec, decoder, tuple(params), scaler)


def records(n, seed=0):
    rng = np.random.default_rng(seed)
    x = rng.normal(size=(n, 5))
    t = rng.uniform(500, 3400, size=n)
    return [FeatureRecord(f"r{i}", tuple(x[i]), t[i]) for i in range(n)]


class TestPredict:
    def test_depth0_arctan_zero_features(self):
        assert predict(model(depth=0), [0.0] * 5) == pytest.approx(0.0, abs=1e-15)

    def test_all_zero_angles_stay_in_ground_state(self):
        # pix(0) = 0 and zero parameters: every Ry is the identity
        assert predict(model(angle_map="pix", depth=1), [0.0] * 5) == pytest.approx(1.0, abs=1e-15)

    @pytest.mark.parametrize("layout,lo,hi", [("5x", -1, 1), ("10xx2", -2, 2)])
    def test_decoder_range(self, layout, lo, hi):
        rng = np.random.default_rng(1)
        for seed in range(5):
            m = model(layout=layout, depth=2, params=init_params(2 * (5 if layout == "5x" else 10), seed))
            out = predict_batch(m, rng.normal(scale=3, size=(100, 5)))
            assert out.min() >= lo - 1e-12 and out.max() <= hi + 1e-12

    @pytest.mark.parametrize("layout,entangler,gate", [
        ("5x", "linear", "CX"), ("5x", "circular4", "CZ"), ("10xx", "circular2", "CX"), ("10xx2", "full", "CZ"),
    ])
    def test_fast_path_matches_state_engine(self, layout, entangler, gate):
        width = 5 if layout == "5x" else 10
        m = model(layout, "arctan", 3, entangler, gate, init_params(3 * width, 9))
        rng = np.random.default_rng(2)
        for x in rng.normal(size=(3, 5)):
            assert predict(m, x) == pytest.approx(predict_via_circuit(m, x), abs=1e-12)

    def test_decoder_width_mismatch(self):
        with pytest.raises(InvalidArgumentError):
            QnnModel(EncoderSpec("5x"), AnsatzSpec(5, 1), Decoder.Z4_PLUS_Z9)
        with pytest.raises(InvalidArgumentError):
            QnnModel(EncoderSpec("10xx"), AnsatzSpec(5, 1), Decoder.Z4)

    def test_unbound_params(self):
        m = QnnModel(EncoderSpec("5x"), AnsatzSpec(5, 1), Decoder.Z4, (), IDENTITY_SCALER)
        with pytest.raises(InvalidArgumentError):
            predict(m, [0.0] * 5)


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 10 ** 6), shift=st.integers(-3, 3))
def test_two_pi_periodicity(seed, shift):
    rng = np.random.default_rng(seed)
    p = init_params(15, seed)
    k = rng.integers(15)
    q = p.copy()
    q[k] += 2 * np.pi * shift
    x = rng.normal(size=(4, 5))
    a = predict_batch(model(depth=3, entangler="circular", params=p), x)
    b = predict_batch(model(depth=3, entangler="circular", params=q), x)
    np.testing.assert_allclose(a, b, atol=1e-10)


class TestCost:
    def test_zero_when_exact(self):
        m = model(depth=1, params=init_params(5, 3))
        rec = records(1)[0]
        target_c = predict(m, rec.features) * 3500
        exact = FeatureRecord("x", rec.features, target_c)
        assert mse_cost(m, m.params, [exact]) == pytest.approx(0.0, abs=1e-20)

    def test_constant_zero_predictor(self):
        reg = CircuitRegressor(AnsatzSpec(1, 0, "none"), (0,))
        # encoder angle pi/2 gives <Z> = 0 regardless of input
        angles = np.full((2, 1), np.pi / 2)
        assert reg.cost(angles, np.array([0.5, -0.5]), []) == pytest.approx(0.25, abs=1e-15)

    def test_permutation_invariant(self):
        m = model(depth=2, params=init_params(10, 1))
        recs = records(12)
        assert mse_cost(m, m.params, recs) == pytest.approx(mse_cost(m, m.params, recs[::-1]), abs=1e-15)

    def test_empty(self):
        with pytest.raises(InvalidArgumentError):
            mse_cost(model(), np.zeros(5), [])


class TestTrain:
    def test_single_qubit_recovers_angle(self):
        # <Z> after Ry(phi + theta)|0> is cos(phi + theta)
        theta_star = 1.1
        phi = np.linspace(-1.0, 1.5, 5)
        reg = CircuitRegressor(AnsatzSpec(1, 1, "none"), (0,))
        res = reg.fit(phi[:, None], np.cos(phi + theta_star), [0.2])
        wrapped = (res.x[0] - theta_star + np.pi) % (2 * np.pi) - np.pi
        assert abs(wrapped) < 1e-3

    def test_zero_budget(self):
        recs = records(10)
        m = model(depth=1, scaler=fit_scaler(recs))
        x0 = init_params(5, 0)
        out = train(m, recs, OptimizerSettings(max_iterations=0), initial_params=x0)
        np.testing.assert_array_equal(out.model.params, x0)
        assert out.final_cost == out.initial_cost == mse_cost(m, x0, recs)

    def test_cost_decreases_and_deterministic(self):
        recs = records(15, seed=5)
        m = model(depth=2, scaler=fit_scaler(recs))
        s = OptimizerSettings(max_iterations=15, seed=7)
        a, b = train(m, recs, s), train(m, recs, s)
        assert a.final_cost <= a.initial_cost
        assert all(y <= x for x, y in zip(a.trace, a.trace[1:]))
        assert a.model.params == b.model.params

    def test_restarts_pick_best(self):
        recs = records(15, seed=6)
        m = model(depth=1, scaler=fit_scaler(recs))
        s = OptimizerSettings(max_iterations=5, seed=1)
        one = train(m, recs, s, restarts=1)
        three = train(m, recs, s, restarts=3)
        assert three.final_cost <= one.final_cost


def test_model_serialization_round_trip():
    recs = records(8)
    m = model(layout="10xx2", depth=2, params=init_params(20, 4), scaler=fit_scaler(recs))
    back = QnnModel.loads(m.dumps())
    assert back == m
    np.testing.assert_array_equal(predict_batch(back, np.ones((2, 5))), predict_batch(m, np.ones((2, 5))))
