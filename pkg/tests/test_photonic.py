import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from photonic_reupload.photonic import (
    TwoModeState,
    apply,
    beam_splitter_matrix,
    detection_probability,
    evolve_batch,
    phase_shifter_matrix,
)

phases = st.floats(min_value=-50.0, max_value=50.0, allow_nan=False)


def test_beam_splitter_is_balanced():
    b = beam_splitter_matrix()
    np.testing.assert_allclose(np.abs(b) ** 2, 0.5, atol=1e-15)


def test_beam_splitter_twice_routes_zero_to_one():
    b = beam_splitter_matrix()
    s = apply(b, apply(b, TwoModeState.zero()))
    assert detection_probability(s, 0) == pytest.approx(0.0, abs=1e-15)
    assert detection_probability(s, 1) == pytest.approx(1.0, abs=1e-15)


def test_beam_splitter_fourth_power_is_minus_identity():
    b = beam_splitter_matrix()
    np.testing.assert_allclose(np.linalg.matrix_power(b, 4), -np.eye(2), atol=1e-15)
    s = TwoModeState.zero()
    for _ in range(4):
        s = apply(b, s)
    assert detection_probability(s, 0) == pytest.approx(1.0, abs=1e-15)


@pytest.mark.parametrize(
    "phi, diag",
    [(0.0, (1, 1)), (math.pi, (1, -1)), (math.pi / 2, (1, 1j))],
)
def test_phase_shifter_values(phi, diag):
    np.testing.assert_allclose(phase_shifter_matrix(phi), np.diag(diag), atol=1e-15)


@pytest.mark.parametrize("bad", [math.nan, math.inf, -math.inf])
def test_phase_shifter_rejects_non_finite(bad):
    with pytest.raises(ValueError):
        phase_shifter_matrix(bad)


def test_apply_examples():
    s = TwoModeState(0.3 + 0.4j, 0.5 - math.sqrt(0.5) * 1j)
    assert apply(np.eye(2), s) == s

    out = apply(beam_splitter_matrix(), TwoModeState.zero())
    r = 1 / math.sqrt(2)
    assert out.amp0 == pytest.approx(r)
    assert out.amp1 == pytest.approx(1j * r)

    plus = TwoModeState(r, r)
    minus = apply(phase_shifter_matrix(math.pi), plus)
    assert minus.amp0 == pytest.approx(r)
    assert minus.amp1 == pytest.approx(-r)


def test_detection_examples():
    r = 1 / math.sqrt(2)
    assert detection_probability(TwoModeState.zero(), 0) == 1.0
    assert detection_probability(TwoModeState.one(), 0) == 0.0
    assert detection_probability(TwoModeState(r, 1j * r), 0) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        detection_probability(TwoModeState.zero(), 2)


def test_unitarity_for_random_phases():
    rng = np.random.default_rng(7)
    b = beam_splitter_matrix()
    np.testing.assert_allclose(b.conj().T @ b, np.eye(2), atol=1e-12)
    for phi in rng.uniform(-100, 100, size=1000):
        u = phase_shifter_matrix(phi)
        np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-12)


def test_norm_preserved_over_long_sequences():
    rng = np.random.default_rng(11)
    for _ in range(50):
        s = TwoModeState.zero()
        for _ in range(100):
            u = beam_splitter_matrix() if rng.random() < 0.5 else phase_shifter_matrix(rng.uniform(-10, 10))
            s = apply(u, s)
        assert s.norm == pytest.approx(1.0, abs=1e-10)


@given(st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi), phases)
def test_probability_completeness(alpha, beta, phi):
    s = TwoModeState(math.cos(alpha / 2), math.sin(alpha / 2) * complex(math.cos(beta), math.sin(beta)))
    s = apply(phase_shifter_matrix(phi), apply(beam_splitter_matrix(), s))
    assert detection_probability(s, 0) + detection_probability(s, 1) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=50)
@given(st.lists(phases, min_size=0, max_size=8))
def test_batch_evolution_matches_matrix_product(ph):
    b = beam_splitter_matrix()
    s = TwoModeState.zero()
    for phi in ph:
        s = apply(phase_shifter_matrix(phi), apply(b, s))
    s = apply(b, s)
    out = evolve_batch(np.array([ph], dtype=float).reshape(1, len(ph)))
    np.testing.assert_allclose(out[0], s.as_vector(), atol=1e-12)
