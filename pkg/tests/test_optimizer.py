import numpy as np
import pytest

from sherlock.errors import NumericError, ShapeError
from sherlock.optimizer import AdamState, adam_step


def make_params(theta=1.0):
    return {"w": np.array([theta])}


class TestAdamStep:
    def test_zero_gradient_leaves_params(self):
        params = make_params()
        adam_step(params, {"w": np.zeros(1)}, AdamState(params), lr=0.005)
        assert params["w"][0] == 1.0

    def test_first_step_closed_form(self):
        # bias correction makes m_hat = g and v_hat = g^2 at t=1,
        # so theta 1.0 with g=2.0 moves to 1.0 - lr * g/|g| = 0.995
        params = make_params(1.0)
        adam_step(params, {"w": np.array([2.0])}, AdamState(params), lr=0.005)
        assert params["w"][0] == pytest.approx(0.995, abs=1e-6)

    def test_constant_gradient_step_magnitude(self):
        params = make_params(0.0)
        state = AdamState(params)
        grads = {"w": np.array([-3.0])}
        previous = params["w"][0]
        for _ in range(25):
            adam_step(params, grads, state, lr=0.005)
            step = params["w"][0] - previous
            previous = params["w"][0]
            assert step == pytest.approx(0.005, rel=0.01)  # sign(g) = -1, ascending

    def test_update_magnitude_bound(self):
        rng = np.random.default_rng(0)
        params = {"w": rng.normal(size=16)}
        state = AdamState(params)
        for _ in range(10):
            grads = {"w": rng.normal(size=16) * 10}
            before = params["w"].copy()
            adam_step(params, grads, state, lr=0.01)
            # first-step-style bound: |delta| <= lr up to epsilon slack
            assert np.all(np.abs(params["w"] - before) <= 0.01 * 1.001)

    def test_deterministic(self):
        rng = np.random.default_rng(5)
        theta = rng.normal(size=8)
        grad_stream = [rng.normal(size=8) for _ in range(5)]

        def run():
            params = {"w": theta.copy()}
            state = AdamState(params)
            for g in grad_stream:
                adam_step(params, {"w": g.copy()}, state, lr=0.005)
            return params["w"]

        assert np.array_equal(run(), run())

    def test_counter_increments(self):
        params = make_params()
        state = AdamState(params)
        for expected in (1, 2, 3):
            adam_step(params, {"w": np.ones(1)}, state, lr=0.001)
            assert state.t == expected

    def test_shape_mismatch_rejected(self):
        params = make_params()
        with pytest.raises(ShapeError):
            adam_step(params, {"w": np.zeros(2)}, AdamState(params), lr=0.005)

    def test_name_mismatch_rejected(self):
        params = make_params()
        with pytest.raises(ShapeError):
            adam_step(params, {"v": np.zeros(1)}, AdamState(params), lr=0.005)

    def test_nonfinite_gradient_names_tensor(self):
        params = make_params()
        with pytest.raises(NumericError, match="'w'"):
            adam_step(params, {"w": np.array([np.nan])}, AdamState(params), lr=0.005)


class TestAdamStateSerialization:
    def test_round_trip_bit_exact(self, tmp_path):
        rng = np.random.default_rng(9)
        params = {"a": rng.normal(size=(3, 2)), "b": rng.normal(size=4)}
        state = AdamState(params)
        for _ in range(3):
            grads = {k: rng.normal(size=v.shape) for k, v in params.items()}
            adam_step(params, grads, state, lr=0.01)
        path = tmp_path / "state.npz"
        state.save(path)
        restored = AdamState.load(path)
        assert restored.t == state.t
        for key in params:
            assert np.array_equal(restored.m[key], state.m[key])
            assert np.array_equal(restored.v[key], state.v[key])
