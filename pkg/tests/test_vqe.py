import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

from noisyvqe import VQE
from noisyvqe.exceptions import ConfigurationError
from noisyvqe.models import build_ising


def test_params_round_trip():
    model = VQE(reps=2, optimizer="pso", budget=50)
    params = model.get_params()
    assert params["reps"] == 2 and params["optimizer"] == "pso"
    twin = clone(model)
    assert twin.get_params() == params
    assert twin.set_params(budget=80).budget == 80


def test_h2_tvha_reaches_ground_state(h2, h2_e0):
    model = VQE(ansatz="tvha", p=1.0, n_layers=2, optimizer="cma_es", budget=4000, seed=0).fit(h2)
    assert model.energy_ == pytest.approx(h2_e0, abs=1e-6)
    assert model.score() == pytest.approx(0.0, abs=1e-6)
    assert model.ansatz_.n_params == 10


def test_model_name_input():
    model = VQE(reps=1, budget=1500).fit("ising")
    assert model.hamiltonian_.n_qubits == 5
    assert model.energy_ < -3.9


def test_predict_matches_estimator():
    model = VQE(reps=1, budget=200).fit(build_ising(3))
    X = np.vstack([np.zeros(6), model.theta_])
    out = model.predict(X)
    assert out[0] == pytest.approx(-2.0)
    assert out[1] == pytest.approx(model.energy_)


def test_noisy_fit_returns_final_iterate(h2):
    model = VQE(mode="sampled", n_shots=64, budget=300, seed=1).fit(h2)
    np.testing.assert_array_equal(model.theta_, model.result_.x_last)
    # the noisy best value is biased low relative to its own exact energy
    assert model.result_.fun < model.estimator_.exact_energy(model.result_.x)
    # finite shot counts quantize the estimates, so single ties are possible
    noisy = model.sample(np.tile(model.theta_, (10, 1)), seed=4)
    assert len(set(noisy)) > 1


def test_unfitted():
    with pytest.raises(NotFittedError):
        VQE().predict(np.zeros((1, 4)))


def test_input_validation():
    model = VQE(reps=1, budget=50).fit(build_ising(3))
    with pytest.raises(ConfigurationError):
        model.predict(np.zeros((1, 5)))
    with pytest.raises(ValueError):
        model.predict(np.full((1, 6), np.nan))
    with pytest.raises(ConfigurationError):
        VQE(init="gaussian").fit(build_ising(3))
