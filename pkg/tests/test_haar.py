import json
import math
from fractions import Fraction

import numpy as np
import pytest

from plateau.experiment import ExperimentConfig, run_point
from plateau.haar import (
    DesignCase,
    check_first_moment,
    check_second_moment,
    first_moment_closed_form,
    frame_potential,
    haar_frame_potential,
    haar_state,
    haar_twirl,
    moments_to_json,
    pauli_generator,
    predict_variance_case3,
    predict_variance_partial,
    sample_haar_unitaries,
    sample_haar_unitary,
    second_moment_closed_form,
    variance_both_designs,
)
from plateau.rpqc import ParamIndex, program_unitary, sample_rpqc, split_at
from plateau.statevector import Projector, Statevector, zz_observable


def test_unitarity(rng):
    u = sample_haar_unitary(2, rng)
    np.testing.assert_allclose(u.conj().T @ u, np.eye(2), atol=1e-12)
    batch = sample_haar_unitaries(16, 50, rng)
    eye = np.broadcast_to(np.eye(16), batch.shape)
    np.testing.assert_allclose(np.conj(np.swapaxes(batch, 1, 2)) @ batch, eye, atol=1e-10)


def test_dimension_validated(rng):
    with pytest.raises(ValueError):
        sample_haar_unitary(1, rng)


def test_first_moment_elements(rng):
    u = sample_haar_unitaries(4, 100_000, rng)
    assert abs(np.mean(u[:, 0, 0] * u[:, 0, 0].conj()) - 0.25) < 5e-3
    assert abs(np.mean(u[:, 0, 1] * u[:, 1, 0].conj())) < 5e-3


def test_first_moment_check_n2(rng):
    est = check_first_moment(2, 200_000, rng)
    assert len(est) == 16
    assert max(e.abs_error for e in est) < 5e-3
    assert all(e.abs_error == abs(e.estimate - e.closed_form) for e in est)


@pytest.mark.parametrize("samples", [0, 9_999])
def test_first_moment_needs_samples(samples, rng):
    with pytest.raises(ValueError):
        check_first_moment(2, samples, rng)


def test_twirl_is_trace_times_identity(rng):
    m = haar_twirl(np.diag([1.0, 2.0, 3.0, 4.0]), 100_000, rng)
    np.testing.assert_allclose(m, 2.5 * np.eye(4), atol=5e-3)


def test_second_moment_closed_form_values():
    assert second_moment_closed_form((0, 0, 0, 0, 0, 0, 0, 0), 4) == pytest.approx(0.1, abs=1e-15)
    assert second_moment_closed_form((0, 0, 0, 1, 0, 0, 0, 1), 4) == pytest.approx(0.05, abs=1e-15)
    assert second_moment_closed_form((0, 0, 1, 1, 0, 1, 1, 0), 4) == pytest.approx(-1 / 60, abs=1e-15)


@pytest.fixture(scope="module")
def second_moments():
    return {e.indices: e for e in check_second_moment(4, 100_000, np.random.default_rng(77))}


def test_second_moment_examples(second_moments):
    for idx, want in [
        ((0, 0, 0, 0, 0, 0, 0, 0), 0.1),
        ((0, 0, 0, 1, 0, 0, 0, 1), 0.05),
        ((0, 0, 1, 1, 0, 1, 1, 0), -1 / 60),
    ]:
        assert abs(second_moments[idx].estimate - want) < 5e-3
    assert max(e.abs_error for e in second_moments.values()) < 5e-3


def test_second_moment_swap_symmetry(second_moments):
    for (i1, j1, i2, j2, k1, l1, k2, l2), e in second_moments.items():
        other = second_moments[(i2, j2, i1, j1, k2, l2, k1, l1)]
        assert e.closed_form == other.closed_form
        assert abs(e.estimate - other.estimate) <= 2 * math.hypot(e.stderr, other.stderr) + 1e-12


def test_second_moment_needs_samples(rng):
    with pytest.raises(ValueError):
        check_second_moment(4, 1000, rng)


def test_left_invariance(rng):
    """First moments of V U agree with those of U for a fixed unitary V."""
    v = sample_haar_unitary(3, np.random.default_rng(1))
    u = sample_haar_unitaries(3, 100_000, rng)
    vu = v @ sample_haar_unitaries(3, 100_000, rng)
    for i, j, k, m in [(0, 0, 0, 0), (1, 2, 2, 1), (0, 1, 0, 1), (2, 0, 1, 2)]:
        a = np.mean(u[:, i, j] * u[:, m, k].conj())
        b = np.mean(vu[:, i, j] * vu[:, m, k].conj())
        want = first_moment_closed_form(i, j, k, m, 3)
        assert abs(a - b) < 5e-3
        assert abs(b - want) < 5e-3


def test_moment_report_json(rng):
    est = check_first_moment(2, 10_000, rng)
    doc = json.loads(moments_to_json(est))
    assert len(doc) == 16
    assert set(doc[0]) == {"indices", "sample_count", "estimate", "closed_form", "stderr", "abs_error"}
    assert doc[0]["sample_count"] == 10_000
    assert len(doc[0]["indices"]) == 4 and len(doc[0]["estimate"]) == 2


# --------------------------------------------------------------------------
# variance predictions
# --------------------------------------------------------------------------


def test_case3_examples():
    p = predict_variance_case3(zz_observable(), 10)
    assert p.value == 2.0 ** -11 == pytest.approx(4.8828e-4, abs=1e-8)
    assert p.case is DesignCase.BOTH_ARE_2_DESIGNS
    assert (p.tr_h2, p.tr_rho2, p.tr_v2, p.tr_v) == (2.0 ** 10, 1.0, 2.0 ** 8, 0.0)
    assert predict_variance_case3(Projector.zeros(4), 4).value == 2.0 ** -9
    # non-traceless V = |1><1| on one qubit, H = Z
    assert variance_both_designs(2, 1, 1, 1, 1) == Fraction(1, 4)


def test_case3_formula_is_exact():
    for n in range(2, 30):
        want = Fraction(2 ** n, 2 ** (2 * n + 1))
        assert predict_variance_case3(zz_observable(), n).value == float(want)


def test_case3_ratio_per_qubit_is_exact():
    for n in range(2, 40):
        a = variance_both_designs(2 ** n, 1, Fraction(2 ** n, 4), 0, n)
        b = variance_both_designs(2 ** (n + 1), 1, Fraction(2 ** (n + 1), 4), 0, n + 1)
        assert b / a == Fraction(1, 2)
        # Tr(H^2) = 1 observables lose a factor of 4 per qubit
        assert variance_both_designs(1, 1, Fraction(2 ** (n + 1), 4), 0, n + 1) / variance_both_designs(
            1, 1, Fraction(2 ** n, 4), 0, n
        ) == Fraction(1, 4)


def test_partial_commuting_case_is_zero(rng):
    p = predict_variance_partial(
        DesignCase.PLUS_IS_2_DESIGN, lambda r: np.eye(4), zz_observable(),
        pauli_generator("Z", 0, 2), 2, 10, rng,
    )
    assert p.value == 0.0 and p.stderr == 0.0


def test_partial_needs_samples(rng):
    with pytest.raises(ValueError):
        predict_variance_partial(
            DesignCase.PLUS_IS_2_DESIGN, lambda r: np.eye(4), zz_observable(),
            pauli_generator("Z", 0, 2), 2, 0, rng,
        )
    with pytest.raises(ValueError):
        predict_variance_partial(
            DesignCase.BOTH_ARE_2_DESIGNS, lambda r: np.eye(4), zz_observable(),
            pauli_generator("Z", 0, 2), 2, 5, rng,
        )


def test_partial_with_haar_half_matches_case3(rng):
    n = 4
    dim = 1 << n
    p = predict_variance_partial(
        DesignCase.MINUS_IS_2_DESIGN, lambda r: sample_haar_unitary(dim, r), zz_observable(),
        pauli_generator("X", 1, n), n, 4000, rng,
    )
    case3 = predict_variance_case3(zz_observable(), n).value
    # the case-3 closed form is leading order; the exact Haar average carries N^2/(N^2-1)
    assert abs(p.value - case3 * dim ** 2 / (dim ** 2 - 1)) < 3 * p.stderr
    assert p.value == pytest.approx(case3, rel=0.01)


@pytest.mark.slow
def test_partial_with_shallow_prefix_matches_empirical_variance():
    """Gradient of the first angle: only a depth-1 prefix precedes it, the rest is deep."""
    n = 4

    def sampler(r):
        spec = sample_rpqc(n, 1, r)
        prefix, (pauli, qubit), _ = split_at(spec, ParamIndex(0, 0))
        return program_unitary(prefix, n), pauli_generator(pauli, qubit, n)

    p = predict_variance_partial(
        DesignCase.PLUS_IS_2_DESIGN, sampler, zz_observable(), None, n, 4000,
        np.random.default_rng(1),
    )
    assert p.value > 0
    assert p.tr_v == 0.0 and p.tr_v2 == pytest.approx(2 ** (n - 2))
    empirical = run_point(ExperimentConfig([n], [100], 4000, master_seed=3), n, 100)
    assert abs(p.value - empirical.grad_var) < 3 * math.hypot(p.stderr, empirical.var_stderr)


# --------------------------------------------------------------------------
# frame potential
# --------------------------------------------------------------------------


def test_haar_frame_potential_values():
    assert haar_frame_potential(4, 1) == 0.25
    assert haar_frame_potential(4, 2) == 0.1
    assert haar_frame_potential(64, 2) == pytest.approx(4.8077e-4, abs=1e-8)


def test_frame_potential_of_haar_states(rng):
    states = [haar_state(2, rng) for _ in range(2000)]
    assert frame_potential(states, 2) == pytest.approx(0.1, rel=0.1)
    assert frame_potential(states, 1) == pytest.approx(0.25, rel=0.1)


def test_frame_potential_trivial_cases():
    same = [Statevector.basis(2, 1) for _ in range(5)]
    assert frame_potential(same, 2) == 1.0
    basis = [Statevector.basis(2, i) for i in range(4)]
    assert frame_potential(basis, 2) == 0.0


def test_frame_potential_errors():
    with pytest.raises(ValueError):
        frame_potential([Statevector.zero(2)], 2)
    with pytest.raises(ValueError):
        frame_potential([Statevector.zero(2), Statevector.zero(2)], 3)
    with pytest.raises(ValueError):
        frame_potential([Statevector.zero(2), Statevector.zero(3)], 2)
