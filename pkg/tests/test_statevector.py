import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from plateau.statevector import (
    Gate,
    PauliString,
    Projector,
    Statevector,
    apply_gate,
    expectation,
    inner_product,
    shot_estimate,
    zz_observable,
)

from conftest import PAULI, dense_cz, dense_rotation, kron_op


def test_ry_quarter_pi_is_sqrt_hadamard():
    s = apply_gate(Statevector.zero(1), Gate.rotation("Y", 0, math.pi / 4))
    np.testing.assert_allclose(s.amplitudes, [math.cos(math.pi / 8), math.sin(math.pi / 8)], atol=1e-15)
    np.testing.assert_allclose(s.amplitudes, [0.923880, 0.382683], atol=1e-6)


def test_rx_pi_gives_minus_i():
    s = apply_gate(Statevector.zero(1), Gate.rotation("X", 0, math.pi))
    np.testing.assert_allclose(s.amplitudes, [0, -1j], atol=1e-15)


def test_cz_flips_sign_of_11():
    s = apply_gate(Statevector.basis(2, 0b11), Gate("CZ", (0, 1)))
    np.testing.assert_allclose(s.amplitudes, [0, 0, 0, -1])
    untouched = apply_gate(Statevector.basis(2, 0b01), Gate("CZ", (1, 0)))
    np.testing.assert_allclose(untouched.amplitudes, [0, 1, 0, 0])


def test_qubit_zero_is_least_significant_bit():
    s = apply_gate(Statevector.zero(3), Gate.rotation("X", 0, math.pi))
    assert abs(s.amplitudes[1]) == pytest.approx(1.0)


def test_gate_validation():
    with pytest.raises(IndexError):
        apply_gate(Statevector.zero(2), Gate.rotation("X", 2, 0.1))
    with pytest.raises(IndexError):
        apply_gate(Statevector.zero(2), Gate("CZ", (0, 5)))
    with pytest.raises(ValueError):
        Gate.rotation("X", 0, math.nan)
    with pytest.raises(ValueError):
        Gate.rotation("Y", 0, math.inf)
    with pytest.raises(ValueError):
        Gate("CZ", (1, 1))
    with pytest.raises(ValueError):
        Gate("SWAP", (0, 1))


def test_statevector_length_checked():
    with pytest.raises(ValueError):
        Statevector(2, np.ones(3))


@pytest.mark.parametrize("pauli", "XYZ")
@pytest.mark.parametrize("qubit", [0, 1, 2])
def test_single_gate_matches_dense_matrix(pauli, qubit, rng):
    n = 3
    amps = rng.standard_normal(8) + 1j * rng.standard_normal(8)
    amps /= np.linalg.norm(amps)
    theta = rng.uniform(0, 2 * math.pi)
    got = apply_gate(Statevector(n, amps.copy()), Gate.rotation(pauli, qubit, theta)).amplitudes
    want = kron_op({qubit: dense_rotation(pauli, theta)}, n) @ amps
    np.testing.assert_allclose(got, want, atol=1e-14)


def test_cz_matches_dense_matrix(rng):
    amps = rng.standard_normal(16) + 1j * rng.standard_normal(16)
    got = apply_gate(Statevector(4, amps.copy()), Gate("CZ", (1, 3))).amplitudes
    np.testing.assert_allclose(got, dense_cz(1, 3, 4) @ amps)


def test_norm_preserved_over_long_random_sequence(rng):
    n = 10
    s = Statevector.zero(n)
    for _ in range(1000):
        if rng.random() < 0.3:
            a = int(rng.integers(n - 1))
            gate = Gate("CZ", (a, a + 1))
        else:
            gate = Gate.rotation("XYZ"[rng.integers(3)], int(rng.integers(n)), rng.uniform(0, 7))
        apply_gate(s, gate)
    assert abs(s.norm_squared() - 1) < 1e-9


@settings(max_examples=50, deadline=None)
@given(
    pauli=st.sampled_from("XYZ"),
    qubit=st.integers(0, 3),
    theta=st.floats(-10, 10, allow_nan=False),
    seed=st.integers(0, 2**32 - 1),
)
def test_rotation_then_inverse_is_identity(pauli, qubit, theta, seed):
    r = np.random.default_rng(seed)
    amps = r.standard_normal(16) + 1j * r.standard_normal(16)
    amps /= np.linalg.norm(amps)
    s = Statevector(4, amps.copy())
    apply_gate(s, Gate.rotation(pauli, qubit, theta))
    apply_gate(s, Gate.rotation(pauli, qubit, -theta))
    np.testing.assert_allclose(s.amplitudes, amps, atol=1e-10)


# --------------------------------------------------------------------------
# expectation
# --------------------------------------------------------------------------


def test_expectation_examples():
    assert expectation(Statevector.zero(1), PauliString({0: "Z"})) == 1.0
    # |01> in ket notation: qubit 0 is 0, qubit 1 is 1 -> index 0b10
    assert expectation(Statevector.basis(2, 0b10), zz_observable()) == -1.0
    bell = Statevector(2, np.array([1, 0, 0, 1]) / math.sqrt(2))
    assert expectation(bell, Projector((0, 0))) == pytest.approx(0.5, abs=1e-15)


def test_expectation_dimension_mismatch():
    with pytest.raises(ValueError):
        expectation(Statevector.zero(2), Projector((0, 0, 0)))
    with pytest.raises(ValueError):
        expectation(Statevector.zero(2), PauliString({3: "X"}))


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_pauli_expectation_matches_eigendecomposition(n, rng):
    for _ in range(20):
        amps = rng.standard_normal(1 << n) + 1j * rng.standard_normal(1 << n)
        amps /= np.linalg.norm(amps)
        weight = int(rng.integers(1, n + 1))
        qubits = rng.choice(n, size=weight, replace=False)
        letters = {int(q): "XYZ"[rng.integers(3)] for q in qubits}
        coeff = float(rng.uniform(-2, 2))
        h = coeff * kron_op({q: PAULI[p] for q, p in letters.items()}, n)
        evals, evecs = np.linalg.eigh(h)
        weights = np.abs(evecs.conj().T @ amps) ** 2
        want = float(weights @ evals)
        got = expectation(Statevector(n, amps), PauliString(letters, coeff))
        assert abs(got - want) < 1e-10


def test_observable_matrices_match_kron(rng):
    ps = PauliString({0: "Y", 2: "X"}, -0.5)
    np.testing.assert_allclose(
        ps.matrix(3), -0.5 * kron_op({0: PAULI["Y"], 2: PAULI["X"]}, 3), atol=1e-15
    )
    proj = Projector((1, 0, 1))
    want = np.zeros((8, 8))
    want[0b101, 0b101] = 1
    np.testing.assert_allclose(proj.matrix(3), want)


def test_traces_are_exact():
    assert PauliString({0: "Z", 1: "Z"}).trace_squared(10) == 2**10
    assert PauliString({0: "X"}, 0.5).trace_squared(3) == 2.0
    assert Projector.zeros(7).trace_squared(7) == 1.0
    combo = 2.0 * PauliString({0: "Z"}) + PauliString({1: "X"})
    assert combo.trace_squared(2) == pytest.approx(5 * 4)


def test_parse_pauli_string():
    assert PauliString.parse("Z0 Z1") == zz_observable()


# --------------------------------------------------------------------------
# inner product
# --------------------------------------------------------------------------


def test_inner_product_examples():
    assert inner_product(Statevector.zero(1), Statevector.zero(1)) == 1 + 0j
    assert inner_product(Statevector.basis(1, 0), Statevector.basis(1, 1)) == 0
    s = Statevector.zero(3)
    for q in range(3):
        apply_gate(s, Gate.rotation("XYZ"[q], q, 0.3 + q))
    apply_gate(s, Gate("CZ", (0, 1)))
    assert abs(inner_product(s, s) - 1) < 1e-10
    with pytest.raises(ValueError):
        inner_product(Statevector.zero(1), Statevector.zero(2))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_inner_product_conjugate_symmetric(seed):
    r = np.random.default_rng(seed)
    a = Statevector(3, r.standard_normal(8) + 1j * r.standard_normal(8))
    b = Statevector(3, r.standard_normal(8) + 1j * r.standard_normal(8))
    assert inner_product(a, b) == pytest.approx(inner_product(b, a).conjugate(), abs=1e-12)


# --------------------------------------------------------------------------
# shot estimates
# --------------------------------------------------------------------------


def plus_state():
    return Statevector(1, np.array([1, 1]) / math.sqrt(2))


def test_shot_estimate_deterministic_outcome(rng):
    for shots in (1, 7, 1000):
        est, err = shot_estimate(Statevector.zero(1), PauliString({0: "Z"}), shots, rng)
        assert est == 1.0
        assert err == 0.0


def test_shot_estimate_binomial_error(rng):
    errs = [shot_estimate(plus_state(), PauliString({0: "Z"}), 100, rng)[1] for _ in range(200)]
    for e in errs:
        assert 0.07 <= e <= 0.13
    assert np.mean(errs) == pytest.approx(0.1, rel=0.05)


def test_shot_estimate_projector_is_unbiased(rng):
    bell = Statevector(2, np.array([1, 0, 0, 1]) / math.sqrt(2))
    estimates = [shot_estimate(bell, Projector((0, 0)), 400, rng)[0] for _ in range(300)]
    # sd of the mean over 300 runs is 0.025 / sqrt(300) ~ 1.4e-3
    assert np.mean(estimates) == pytest.approx(0.5, abs=6e-3)


def test_shot_estimate_requires_shots(rng):
    with pytest.raises(ValueError):
        shot_estimate(plus_state(), PauliString({0: "Z"}), 0, rng)


def test_quadrupling_shots_halves_error(rng):
    def mean_abs_error(shots):
        return np.mean(
            [abs(shot_estimate(plus_state(), PauliString({0: "Z"}), shots, rng)[0]) for _ in range(200)]
        )

    ratio = mean_abs_error(250) / mean_abs_error(1000)
    assert 2 * 0.8 <= ratio <= 2 * 1.2
