"""Haar-random unitaries, moment checks, design diagnostics and variance predictors."""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import asdict, dataclass, field
from enum import Enum
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from .statevector import DTYPE, Observable, Statevector


def sample_haar_unitaries(dim: int, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` Haar-random ``dim x dim`` unitaries, shape ``(count, dim, dim)``.

    QR of a complex Ginibre matrix, with the columns rephased so that ``R``
    has a positive real diagonal. Without the rephasing the result is not
    Haar distributed.
    """
    if dim < 2:
        raise ValueError(f"dimension must be >= 2, got {dim}")
    z = rng.standard_normal((count, dim, dim)) + 1j * rng.standard_normal((count, dim, dim))
    z /= math.sqrt(2)
    q, r = np.linalg.qr(z)
    d = np.diagonal(r, axis1=-2, axis2=-1)
    return q * (d / np.abs(d))[:, None, :]


def sample_haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    return sample_haar_unitaries(dim, 1, rng)[0]


def haar_state(n_qubits: int, rng: np.random.Generator) -> Statevector:
    """First column of a Haar unitary, i.e. a uniformly random pure state."""
    dim = 1 << n_qubits
    v = rng.standard_normal(dim) + 1j * rng.standard_normal(dim)
    return Statevector(n_qubits, v / np.linalg.norm(v))


# --------------------------------------------------------------------------
# Moment checks
# --------------------------------------------------------------------------


@dataclass
class HaarMomentEstimate:
    indices: tuple[int, ...]
    sample_count: int
    estimate: complex
    closed_form: complex
    stderr: float = 0.0
    abs_error: float = field(init=False)

    def __post_init__(self):
        self.abs_error = abs(self.estimate - self.closed_form)

    def to_dict(self) -> dict:
        d = asdict(self)
        d["indices"] = list(self.indices)
        for key in ("estimate", "closed_form"):
            d[key] = [float(np.real(d[key])), float(np.imag(d[key]))]
        return d


def moments_to_json(estimates: Sequence[HaarMomentEstimate]) -> str:
    return json.dumps([e.to_dict() for e in estimates], indent=1)


def first_moment_closed_form(i: int, j: int, k: int, m: int, dim: int) -> float:
    """``E[U_ij conj(U_mk)] = delta_im delta_jk / N``."""
    return float(i == m and j == k) / dim


def second_moment_closed_form(idx: Sequence[int], dim: int) -> float:
    """``E[U_{i1 j1} U_{i2 j2} conj(U_{i1' j1'}) conj(U_{i2' j2'})]`` (Weingarten, t=2).

    ``idx`` is ``(i1, j1, i2, j2, i1', j1', i2', j2')``.
    """
    i1, j1, i2, j2, k1, l1, k2, l2 = idx
    d = lambda a, b: float(a == b)
    n = dim
    identity_i = d(i1, k1) * d(i2, k2)
    swap_i = d(i1, k2) * d(i2, k1)
    identity_j = d(j1, l1) * d(j2, l2)
    swap_j = d(j1, l2) * d(j2, l1)
    same = (identity_i * identity_j + swap_i * swap_j) / (n * n - 1)
    cross = (identity_i * swap_j + swap_i * identity_j) / (n * (n * n - 1))
    return same - cross


_CHUNK = 20_000


def _accumulate(build, dim: int, samples: int, rng: np.random.Generator):
    """Chunked sums of ``x x^dag`` and ``|x|^2 |x|^2^T`` over per-sample feature rows.

    ``build`` maps a ``(chunk, N, N)`` stack of unitaries to feature rows.
    """
    second = sq = None
    done = 0
    while done < samples:
        m = min(_CHUNK, samples - done)
        x = build(sample_haar_unitaries(dim, m, rng))
        a2 = np.abs(x) ** 2
        if second is None:
            second, sq = x.T @ x.conj(), a2.T @ a2
        else:
            second += x.T @ x.conj()
            sq += a2.T @ a2
        done += m
    return second / samples, sq / samples


def _estimate(idx, samples, est, closed, mean_sq) -> HaarMomentEstimate:
    var = max(float(mean_sq) - abs(est) ** 2, 0.0)
    return HaarMomentEstimate(idx, samples, complex(est), closed, math.sqrt(var / samples))


def check_first_moment(
    dim: int, samples: int, rng: np.random.Generator, min_samples: int = 10_000
) -> list[HaarMomentEstimate]:
    """Monte Carlo ``E[U_ij conj(U_mk)]`` for every index tuple ``(i, j, k, m)``."""
    if samples < max(min_samples, 1):
        raise ValueError(f"first-moment check needs at least {min_samples} samples, got {samples}")
    if dim > 8:
        raise ValueError("first-moment check enumerates all N**4 tuples; use N <= 8")
    # second[a, b] = mean of u_a conj(u_b) with a = (i, j), b = (m, k)
    second, sq = _accumulate(lambda u: u.reshape(len(u), dim * dim), dim, samples, rng)
    out = []
    for i, j, k, m in itertools.product(range(dim), repeat=4):
        a, b = i * dim + j, m * dim + k
        out.append(
            _estimate((i, j, k, m), samples, second[a, b],
                      first_moment_closed_form(i, j, k, m, dim), sq[a, b])
        )
    return out


def haar_twirl(operator: np.ndarray, samples: int, rng: np.random.Generator) -> np.ndarray:
    """Monte Carlo average of ``U O U^dag``; converges to ``Tr(O)/N * I``."""
    total = np.zeros_like(operator, dtype=DTYPE)
    done = 0
    while done < samples:
        m = min(_CHUNK, samples - done)
        u = sample_haar_unitaries(operator.shape[0], m, rng)
        total += np.einsum("sij,jk,slk->il", u, operator, u.conj())
        done += m
    return total / samples


def second_moment_tuples(dim: int) -> list[tuple[int, ...]]:
    """All 8-index tuples over values ``0..min(N, 3)-1``.

    Three values realise every coincidence pattern the closed form
    distinguishes, plus many tuples where it vanishes.
    """
    return list(itertools.product(range(min(dim, 3)), repeat=8))


def check_second_moment(
    dim: int, samples: int, rng: np.random.Generator, min_samples: int = 100_000
) -> list[HaarMomentEstimate]:
    if samples < max(min_samples, 1):
        raise ValueError(f"second-moment check needs at least {min_samples} samples, got {samples}")
    if dim > 8:
        raise ValueError("second-moment check supports N <= 8")
    r = min(dim, 3)

    def pairs(u):
        v = u[:, :r, :r].reshape(len(u), r * r)
        return (v[:, :, None] * v[:, None, :]).reshape(len(u), r ** 4)

    moments, sq = _accumulate(pairs, dim, samples, rng)
    out = []
    for idx in second_moment_tuples(dim):
        i1, j1, i2, j2, k1, l1, k2, l2 = idx
        a = (i1 * r + j1) * r * r + (i2 * r + j2)
        b = (k1 * r + l1) * r * r + (k2 * r + l2)
        out.append(
            _estimate(idx, samples, moments[a, b], second_moment_closed_form(idx, dim), sq[a, b])
        )
    return out


# --------------------------------------------------------------------------
# Variance predictions
# --------------------------------------------------------------------------


class DesignCase(str, Enum):
    MINUS_IS_2_DESIGN = "minus_is_2_design"
    PLUS_IS_2_DESIGN = "plus_is_2_design"
    BOTH_ARE_2_DESIGNS = "both_are_2_designs"


@dataclass(frozen=True)
class VariancePrediction:
    case: DesignCase
    value: float
    tr_h2: float
    tr_rho2: float
    tr_v2: float
    tr_v: float
    n_qubits: int
    stderr: float = 0.0


def _exact(x) -> Fraction:
    return x if isinstance(x, Fraction) else Fraction(x)


def variance_both_designs(tr_h2, tr_rho2, tr_v2, tr_v, n_qubits: int) -> Fraction:
    """``2 Tr(H^2) Tr(rho^2) (Tr(V^2)/2^3n - Tr(V)^2/2^4n)`` in exact arithmetic."""
    dim = Fraction(2) ** n_qubits
    return (
        2 * _exact(tr_h2) * _exact(tr_rho2)
        * (_exact(tr_v2) / dim ** 3 - _exact(tr_v) ** 2 / dim ** 4)
    )


def predict_variance_case3(obs: Observable, n_qubits: int, tr_rho2: float = 1) -> VariancePrediction:
    """Plateau variance when both circuit halves are 2-designs.

    The generator is a half-angle Pauli ``V = P/2``: ``Tr V = 0`` and
    ``Tr V^2 = 2**(n-2)``.
    """
    tr_h2 = Fraction(obs.trace_squared(n_qubits))
    tr_v2 = Fraction(2) ** n_qubits / 4
    value = variance_both_designs(tr_h2, tr_rho2, tr_v2, 0, n_qubits)
    return VariancePrediction(
        DesignCase.BOTH_ARE_2_DESIGNS, float(value), float(tr_h2), float(tr_rho2),
        float(tr_v2), 0.0, n_qubits,
    )


def _commutator_square_trace(v: np.ndarray, a: np.ndarray) -> float:
    c = v @ a - a @ v
    return float(np.trace(c @ c).real)


def predict_variance_partial(
    case: DesignCase,
    sampler: Callable[[np.random.Generator], np.ndarray],
    obs: Observable,
    generator: np.ndarray | None,
    n_qubits: int,
    samples: int,
    rng: np.random.Generator,
) -> VariancePrediction:
    """Semi-analytic variance when only one half is a 2-design.

    ``sampler`` draws ``u`` (a dense unitary) from the other half's
    distribution. For ``MINUS_IS_2_DESIGN`` the average is of
    ``Tr([V, u^dag H u]^2)``, for ``PLUS_IS_2_DESIGN`` of
    ``Tr([V, u rho u^dag]^2)`` with ``rho = |0><0|``.

    With ``generator=None`` the sampler returns ``(u, V)`` pairs instead,
    for circuits whose generator axis is itself random.
    """
    if samples < 1:
        raise ValueError(f"sample count must be positive, got {samples}")
    case = DesignCase(case)
    dim = 1 << n_qubits
    h = obs.matrix(n_qubits)
    rho = np.zeros((dim, dim), dtype=DTYPE)
    rho[0, 0] = 1.0
    traces = np.empty(samples)
    v2s, v1s = np.empty(samples), np.empty(samples)
    for s in range(samples):
        if generator is None:
            u, v = sampler(rng)
        else:
            u, v = sampler(rng), generator
        v2s[s] = np.trace(v @ v).real
        v1s[s] = np.trace(v).real
        if case is DesignCase.MINUS_IS_2_DESIGN:
            traces[s] = _commutator_square_trace(v, u.conj().T @ h @ u)
        elif case is DesignCase.PLUS_IS_2_DESIGN:
            traces[s] = _commutator_square_trace(v, u @ rho @ u.conj().T)
        else:
            raise ValueError("use predict_variance_case3 when both halves are 2-designs")
    if case is DesignCase.MINUS_IS_2_DESIGN:
        prefactor = -1.0 / dim ** 2  # Tr(rho^2) = 1
    else:
        prefactor = -obs.trace_squared(n_qubits) / dim ** 2
    mean = math.fsum(traces) / samples
    tr_v2, tr_v = math.fsum(v2s) / samples, math.fsum(v1s) / samples
    stderr = float(np.std(traces, ddof=1) / math.sqrt(samples)) if samples > 1 else 0.0
    return VariancePrediction(
        case, prefactor * mean, obs.trace_squared(n_qubits), 1.0, tr_v2, tr_v,
        n_qubits, abs(prefactor) * stderr,
    )


def pauli_generator(pauli: str, qubit: int, n_qubits: int) -> np.ndarray:
    """Dense ``P/2`` on ``qubit``."""
    from .statevector import PauliString

    return PauliString({qubit: pauli}, 0.5).matrix(n_qubits)


# --------------------------------------------------------------------------
# Frame potential
# --------------------------------------------------------------------------


def haar_frame_potential(dim: int, t: int) -> float:
    """``t! (N-1)! / (N+t-1)!``: ``1/N`` for t=1, ``2/(N(N+1))`` for t=2."""
    return float(Fraction(math.factorial(t) * math.factorial(dim - 1), math.factorial(dim + t - 1)))


def frame_potential(states: Sequence[Statevector] | np.ndarray, t: int) -> float:
    """Mean of ``|<psi_i|psi_j>|^(2t)`` over ordered pairs ``i != j``."""
    if t not in (1, 2):
        raise ValueError(f"t must be 1 or 2, got {t}")
    if isinstance(states, np.ndarray):
        amps = states
    else:
        if len({s.dim for s in states}) > 1:
            raise ValueError("states must share one dimension")
        amps = np.stack([s.amplitudes for s in states]) if len(states) else np.empty((0, 0))
    m = amps.shape[0]
    if m < 2:
        raise ValueError(f"frame potential needs at least 2 states, got {m}")
    gram = amps.conj() @ amps.T
    overlaps = (gram.real ** 2 + gram.imag ** 2) ** t
    total = overlaps.sum() - np.trace(overlaps)
    return float(total / (m * (m - 1)))
