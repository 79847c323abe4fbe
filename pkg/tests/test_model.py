import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonic_reupload.model import (
    Encoding,
    InputVector,
    Label,
    ModelParams,
    classify,
    forward,
    forward_batch,
    forward_with_override,
    layer_phase,
    load_model,
    save_model,
    shifter_index,
)
from photonic_reupload.photonic import beam_splitter_matrix, phase_shifter_matrix
from photonic_reupload.sinusoid import PHASES, eval_sinusoid, fit_three_phase

angles = st.floats(min_value=-math.pi, max_value=math.pi)
unit = st.floats(min_value=0.0, max_value=1.0)
thetas = st.lists(angles, min_size=6, max_size=6)


def random_params(rng, encoding=Encoding.LINEAR, layers=3):
    return ModelParams(tuple(rng.uniform(-math.pi, math.pi, 2 * layers)), layers=layers, encoding=encoding)


def test_params_validation():
    with pytest.raises(ValueError):
        ModelParams((0.0,) * 5)
    with pytest.raises(ValueError):
        ModelParams((0.0,) * 6, threshold=1.0)
    with pytest.raises(ValueError):
        ModelParams((0.0,) * 6, threshold=0.0)
    with pytest.raises(ValueError):
        ModelParams((math.nan,) + (0.0,) * 5)


def test_layer_phase_linear_examples():
    zero = ModelParams.zeros()
    assert all(layer_phase(zero, k, (0.3, 0.9)) == 0 for k in (1, 2, 3))
    p = ModelParams((0, 0, 1.0, 2.0, 0, 0))
    assert layer_phase(p, 2, (0.5, 0.25)) == pytest.approx(1.0)
    p = ModelParams((1.5, -2.0, 0.3, 0.7, 3.0, 1.0))
    assert all(layer_phase(p, k, (0.0, 0.0)) == 0 for k in (1, 2, 3))


def test_layer_phase_affine():
    p = ModelParams((0.1, 0.2, 0.3, 0.4, 0.5, 0.6), encoding=Encoding.AFFINE)
    assert layer_phase(p, 2, (0.5, 0.25)) == pytest.approx((0.8, 0.65))


@pytest.mark.parametrize("k", [0, 4, -1])
def test_layer_index_out_of_range(k):
    p = ModelParams.zeros()
    with pytest.raises(ValueError):
        layer_phase(p, k, (0.1, 0.1))
    with pytest.raises(ValueError):
        forward_with_override(p, k, 0.0, (0.1, 0.1))


def test_zero_parameters_give_unit_probability():
    # all phases zero: the circuit is B^4 = -I
    p = ModelParams.zeros()
    for x in [(0.0, 0.0), (0.4, 0.9), (1.0, 1.0)]:
        assert forward(p, x) == pytest.approx(1.0, abs=1e-14)
    np.testing.assert_allclose(forward_batch(p, np.random.default_rng(0).random((50, 2))), 1.0, atol=1e-14)


@pytest.mark.parametrize("phi, expected", [(math.pi, 1.0), (0.0, 0.0), (math.pi / 2, 0.5)])
def test_single_layer_interferometer(phi, expected):
    # B diag(1, e^{i phi}) B gives p0 = sin^2(phi / 2)
    p = ModelParams((1.0, 0.0), layers=1)
    assert forward_with_override(p, 1, phi, (0.3, 0.3)) == pytest.approx(expected, abs=1e-14)
    assert math.sin(phi / 2) ** 2 == pytest.approx(expected, abs=1e-14)


def test_forward_matches_explicit_matrix_product():
    rng = np.random.default_rng(1)
    b = beam_splitter_matrix()
    for _ in range(100):
        p = random_params(rng)
        x = rng.random(2)
        u = b
        for k in (1, 2, 3):
            u = b @ phase_shifter_matrix(layer_phase(p, k, x)) @ u
        assert forward(p, x) == pytest.approx(abs(u[0, 0]) ** 2, abs=1e-13)


def test_affine_circuit_matches_explicit_matrix_product():
    rng = np.random.default_rng(2)
    b = beam_splitter_matrix()
    for _ in range(50):
        p = random_params(rng, Encoding.AFFINE)
        x = rng.random(2)
        u = np.eye(2)
        for k in (1, 2, 3):
            for phi in layer_phase(p, k, x):
                u = phase_shifter_matrix(phi) @ b @ u
        u = b @ u
        assert forward(p, x) == pytest.approx(abs(u[0, 0]) ** 2, abs=1e-13)


@pytest.mark.parametrize("encoding", list(Encoding))
def test_batch_and_scalar_forward_agree(encoding):
    rng = np.random.default_rng(3)
    p = random_params(rng, encoding)
    X = rng.random((40, 2))
    batch = forward_batch(p, X)
    np.testing.assert_allclose(batch, [forward(p, x) for x in X], atol=1e-13)
    slot = shifter_index(p, 2)
    np.testing.assert_allclose(
        forward_batch(p, X, override=(slot, 0.7)),
        [forward_with_override(p, 2, 0.7, x) for x in X],
        atol=1e-13,
    )


def test_override_with_own_phase_is_forward():
    rng = np.random.default_rng(4)
    for _ in range(50):
        p = random_params(rng)
        x = tuple(rng.random(2))
        k = int(rng.integers(1, 4))
        assert forward_with_override(p, k, layer_phase(p, k, x), x) == forward(p, x)


def test_override_zero_on_zero_params():
    assert forward_with_override(ModelParams.zeros(), 1, 0.0, (0.5, 0.5)) == pytest.approx(1.0, abs=1e-14)


@settings(max_examples=100, deadline=None)
@given(thetas, unit, unit, st.integers(1, 3), st.lists(st.floats(-20, 20), min_size=32, max_size=32))
def test_response_is_sinusoidal_in_each_layer_phase(theta, x1, x2, k, probes):
    p = ModelParams(tuple(theta))
    x = (x1, x2)
    coeffs = fit_three_phase(*(forward_with_override(p, k, ph, x) for ph in PHASES))
    for phi in probes:
        assert eval_sinusoid(coeffs, phi) == pytest.approx(forward_with_override(p, k, phi, x), abs=1e-10)


@settings(max_examples=50, deadline=None)
@given(thetas, unit, unit, st.integers(1, 3), angles)
def test_phase_level_periodicity(theta, x1, x2, k, phi):
    p = ModelParams(tuple(theta))
    a = forward_with_override(p, k, phi, (x1, x2))
    b = forward_with_override(p, k, phi + 2 * math.pi, (x1, x2))
    assert a == pytest.approx(b, abs=1e-12)


@settings(max_examples=50, deadline=None)
@given(thetas, unit, unit, st.integers(0, 5))
def test_affine_parameters_are_2pi_periodic(theta, x1, x2, j):
    p = ModelParams(tuple(theta), encoding=Encoding.AFFINE)
    shifted = list(theta)
    shifted[j] += 2 * math.pi
    assert forward(p, (x1, x2)) == pytest.approx(forward(p.with_theta(shifted), (x1, x2)), abs=1e-12)


@settings(max_examples=200)
@given(thetas, st.floats(-3, 3), st.floats(-3, 3), st.sampled_from(list(Encoding)))
def test_forward_is_a_probability(theta, x1, x2, enc):
    v = forward(ModelParams(tuple(theta), encoding=enc), (x1, x2))
    assert -1e-12 <= v <= 1 + 1e-12


@pytest.mark.parametrize("p, label", [(0.9, Label.YES), (0.5, Label.NO), (0.1, Label.NO), (1.3, Label.YES), (-0.2, Label.NO)])
def test_classify(p, label):
    assert classify(ModelParams.zeros(), p) is label


def test_model_json_round_trip_is_bit_exact(tmp_path):
    rng = np.random.default_rng(9)
    p = ModelParams(tuple(rng.normal(size=6) * 1e3), encoding=Encoding.AFFINE, threshold=0.4)
    path = tmp_path / "model.json"
    save_model(p, path)
    doc = json.loads(path.read_text())
    assert set(doc) == {"layers", "encoding", "threshold", "theta"}
    q = load_model(path)
    assert q == p
    assert [t.hex() for t in q.theta] == [t.hex() for t in p.theta]


def test_model_json_missing_field(tmp_path):
    path = tmp_path / "m.json"
    path.write_text(json.dumps({"layers": 3, "theta": [0] * 6}))
    with pytest.raises(ValueError, match="encoding"):
        load_model(path)


def test_input_vector_unpacks():
    assert forward(ModelParams.zeros(), InputVector(0.2, 0.3)) == pytest.approx(1.0)
