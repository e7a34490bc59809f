"""Dense statevector simulation: gates, observables, expectation values.

Qubit ``q`` is bit ``q`` of the amplitude index, so qubit 0 is the
least-significant bit. Rotations follow ``R_P(theta) = exp(-i theta P / 2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Mapping, Sequence

import numpy as np

DTYPE = np.complex128

ROTATIONS = ("RX", "RY", "RZ")
PAULIS = ("X", "Y", "Z")


# --------------------------------------------------------------------------
# Statevector
# --------------------------------------------------------------------------


@dataclass
class Statevector:
    """``2**n_qubits`` complex amplitudes, owned and mutated in place by gates."""

    n_qubits: int
    amplitudes: np.ndarray

    def __post_init__(self):
        if self.n_qubits < 1:
            raise ValueError(f"n_qubits must be >= 1, got {self.n_qubits}")
        self.amplitudes = np.asarray(self.amplitudes, dtype=DTYPE)
        if self.amplitudes.shape != (1 << self.n_qubits,):
            raise ValueError(
                f"expected {1 << self.n_qubits} amplitudes for {self.n_qubits} qubits, "
                f"got shape {self.amplitudes.shape}"
            )

    @classmethod
    def zero(cls, n_qubits: int) -> "Statevector":
        amps = np.zeros(1 << n_qubits, dtype=DTYPE)
        amps[0] = 1.0
        return cls(n_qubits, amps)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> "Statevector":
        amps = np.zeros(1 << n_qubits, dtype=DTYPE)
        amps[index] = 1.0
        return cls(n_qubits, amps)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def copy(self) -> "Statevector":
        return Statevector(self.n_qubits, self.amplitudes.copy())


def inner_product(a: Statevector, b: Statevector) -> complex:
    """Return ``<a|b>`` (conjugate-linear in ``a``)."""
    if a.dim != b.dim:
        raise ValueError(f"dimension mismatch: {a.dim} vs {b.dim}")
    return complex(np.vdot(a.amplitudes, b.amplitudes))


# --------------------------------------------------------------------------
# Gates
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class Gate:
    kind: str
    targets: tuple[int, ...]
    angle: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(t) for t in self.targets))
        if self.kind in ROTATIONS:
            if len(self.targets) != 1:
                raise ValueError(f"{self.kind} acts on exactly one qubit")
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError(f"{self.kind} needs a finite angle, got {self.angle!r}")
        elif self.kind == "CZ":
            if len(self.targets) != 2 or self.targets[0] == self.targets[1]:
                raise ValueError(f"CZ needs two distinct targets, got {self.targets}")
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")

    @classmethod
    def rotation(cls, pauli: str, qubit: int, angle: float) -> "Gate":
        return cls("R" + pauli, (qubit,), float(angle))

    def matrix(self) -> np.ndarray:
        if self.kind == "CZ":
            return np.diag([1, 1, 1, -1]).astype(DTYPE)
        return rotation_matrix(self.kind[1], self.angle)


def rotation_matrix(pauli: str, angle: float) -> np.ndarray:
    c, s = math.cos(angle / 2), math.sin(angle / 2)
    if pauli == "X":
        return np.array([[c, -1j * s], [-1j * s, c]], dtype=DTYPE)
    if pauli == "Y":
        return np.array([[c, -s], [s, c]], dtype=DTYPE)
    if pauli == "Z":
        return np.array([[c - 1j * s, 0], [0, c + 1j * s]], dtype=DTYPE)
    raise ValueError(f"unknown Pauli {pauli!r}")


def apply_1q(amps: np.ndarray, n_qubits: int, qubit: int, m00, m01, m10, m11) -> None:
    """In-place 2x2 update on ``qubit`` of a ``(batch, 2**n)`` amplitude array."""
    batch = amps.shape[0]
    view = amps.reshape(batch, 1 << (n_qubits - qubit - 1), 2, 1 << qubit)
    a0 = view[:, :, 0, :]
    a1 = view[:, :, 1, :]
    new0 = m00 * a0 + m01 * a1
    view[:, :, 1, :] = m10 * a0 + m11 * a1
    view[:, :, 0, :] = new0


@lru_cache(maxsize=None)
def _indices(n_qubits: int) -> np.ndarray:
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    idx.flags.writeable = False
    return idx


@lru_cache(maxsize=None)
def cz_mask(n_qubits: int, a: int, b: int) -> np.ndarray:
    idx = _indices(n_qubits)
    mask = ((idx >> a) & 1).astype(bool) & ((idx >> b) & 1).astype(bool)
    mask.flags.writeable = False
    return mask


@lru_cache(maxsize=None)
def cz_ladder_signs(n_qubits: int) -> np.ndarray:
    """Diagonal of the product of CZ on every pair ``(j, j+1)``."""
    idx = _indices(n_qubits)
    bits = (idx[:, None] >> np.arange(n_qubits)) & 1
    parity = np.sum(bits[:, :-1] & bits[:, 1:], axis=1) & 1
    signs = (1 - 2 * parity).astype(np.float64)
    signs.flags.writeable = False
    return signs


def _check_targets(state: Statevector, targets: Sequence[int]) -> None:
    for t in targets:
        if not 0 <= t < state.n_qubits:
            raise IndexError(f"qubit {t} out of range for {state.n_qubits} qubits")


def apply_gate(state: Statevector, gate: Gate) -> Statevector:
    """Apply ``gate`` to ``state`` in place and return the same object."""
    _check_targets(state, gate.targets)
    if gate.kind == "CZ":
        mask = cz_mask(state.n_qubits, *sorted(gate.targets))
        state.amplitudes[mask] *= -1
        return state
    m = rotation_matrix(gate.kind[1], gate.angle)
    apply_1q(
        state.amplitudes.reshape(1, -1),
        state.n_qubits,
        gate.targets[0],
        m[0, 0], m[0, 1], m[1, 0], m[1, 1],
    )
    return state


def apply_pauli(state: Statevector, pauli: str, qubit: int) -> Statevector:
    """Multiply by a bare Pauli operator in place."""
    _check_targets(state, (qubit,))
    entries = {
        "X": (0, 1, 1, 0),
        "Y": (0, -1j, 1j, 0),
        "Z": (1, 0, 0, -1),
    }[pauli]
    apply_1q(state.amplitudes.reshape(1, -1), state.n_qubits, qubit, *entries)
    return state


# --------------------------------------------------------------------------
# Observables
# --------------------------------------------------------------------------


class Observable:
    """Hermitian operator acting on a statevector."""

    def apply_amplitudes(self, amps: np.ndarray, n_qubits: int) -> np.ndarray:
        """Return ``H @ amps`` along the last axis."""
        raise NotImplementedError

    def expectation_amplitudes(self, amps: np.ndarray, n_qubits: int) -> np.ndarray:
        """Expectation along the last axis of a (possibly batched) amplitude array."""
        raise NotImplementedError

    def trace_squared(self, n_qubits: int) -> float:
        """Exact ``Tr(H^2)``."""
        raise NotImplementedError

    def trace(self, n_qubits: int) -> float:
        raise NotImplementedError

    def check_qubits(self, n_qubits: int) -> None:
        pass

    def matrix(self, n_qubits: int) -> np.ndarray:
        dim = 1 << n_qubits
        return self.apply_amplitudes(np.eye(dim, dtype=DTYPE), n_qubits).T

    def __add__(self, other: "Observable") -> "SumObservable":
        return SumObservable([(1.0, self), (1.0, other)])

    def __rmul__(self, scale: float) -> "SumObservable":
        return SumObservable([(float(scale), self)])


@dataclass(frozen=True)
class PauliString(Observable):
    """``coefficient * prod_q P_q``; identity positions are omitted from ``letters``."""

    letters: Mapping[int, str]
    coefficient: float = 1.0

    def __post_init__(self):
        letters = {int(q): p for q, p in dict(self.letters).items()}
        for q, p in letters.items():
            if q < 0:
                raise IndexError(f"negative qubit index {q}")
            if p not in PAULIS:
                raise ValueError(f"Pauli letter must be X, Y or Z, got {p!r}")
        object.__setattr__(self, "letters", letters)

    @classmethod
    def parse(cls, text: str, coefficient: float = 1.0) -> "PauliString":
        """``"Z0 Z1"`` style constructor."""
        letters = {int(tok[1:]): tok[0].upper() for tok in text.split()}
        return cls(letters, coefficient)

    @property
    def masks(self) -> tuple[int, int, int]:
        x = z = 0
        ny = 0
        for q, p in self.letters.items():
            if p in "XY":
                x |= 1 << q
            if p in "YZ":
                z |= 1 << q
            ny += p == "Y"
        return x, z, ny

    def check_qubits(self, n_qubits: int) -> None:
        for q in self.letters:
            if q >= n_qubits:
                raise ValueError(f"Pauli string acts on qubit {q} but state has {n_qubits} qubits")

    def _phase_and_flip(self, n_qubits: int) -> tuple[np.ndarray, int]:
        # P|b> = i^ny (-1)^popcount(b & z) |b ^ x>
        x, z, ny = self.masks
        idx = _indices(n_qubits)
        parity = np.zeros(idx.shape, dtype=np.int64)
        for q in range(n_qubits):
            if (z >> q) & 1:
                parity ^= (idx >> q) & 1
        phase = (1 - 2 * parity) * (1j ** ny) * self.coefficient
        return phase.astype(DTYPE), x

    def apply_amplitudes(self, amps: np.ndarray, n_qubits: int) -> np.ndarray:
        self.check_qubits(n_qubits)
        phase, x = self._phase_and_flip(n_qubits)
        out = amps * phase
        if x:
            out = out[..., _indices(n_qubits) ^ x]
        return out

    def expectation_amplitudes(self, amps: np.ndarray, n_qubits: int) -> np.ndarray:
        self.check_qubits(n_qubits)
        x, _, _ = self.masks
        if x == 0:
            # diagonal: sum of signed probabilities
            phase, _ = self._phase_and_flip(n_qubits)
            probs = amps.real ** 2 + amps.imag ** 2
            return probs @ phase.real
        return np.sum(amps.conj() * self.apply_amplitudes(amps, n_qubits), axis=-1).real

    def trace_squared(self, n_qubits: int) -> float:
        return self.coefficient ** 2 * 2.0 ** n_qubits

    def trace(self, n_qubits: int) -> float:
        return self.coefficient * 2.0 ** n_qubits if not self.letters else 0.0

    @property
    def outcome_values(self) -> tuple[float, float]:
        return (self.coefficient, -self.coefficient)


@dataclass(frozen=True)
class Projector(Observable):
    """``|b><b|`` for a computational basis state; ``bitstring[q]`` is qubit ``q``."""

    bitstring: tuple[int, ...]

    def __post_init__(self):
        bits = tuple(int(b) for b in self.bitstring)
        if any(b not in (0, 1) for b in bits):
            raise ValueError(f"bitstring entries must be 0 or 1, got {bits}")
        object.__setattr__(self, "bitstring", bits)

    @classmethod
    def zeros(cls, n_qubits: int) -> "Projector":
        return cls((0,) * n_qubits)

    @property
    def index(self) -> int:
        return sum(b << q for q, b in enumerate(self.bitstring))

    def check_qubits(self, n_qubits: int) -> None:
        if len(self.bitstring) != n_qubits:
            raise ValueError(
                f"projector has {len(self.bitstring)} bits but state has {n_qubits} qubits"
            )

    def apply_amplitudes(self, amps: np.ndarray, n_qubits: int) -> np.ndarray:
        self.check_qubits(n_qubits)
        out = np.zeros_like(amps)
        out[..., self.index] = amps[..., self.index]
        return out

    def expectation_amplitudes(self, amps: np.ndarray, n_qubits: int) -> np.ndarray:
        self.check_qubits(n_qubits)
        a = amps[..., self.index]
        return a.real ** 2 + a.imag ** 2

    def trace_squared(self, n_qubits: int) -> float:
        return 1.0

    def trace(self, n_qubits: int) -> float:
        return 1.0

    @property
    def outcome_values(self) -> tuple[float, float]:
        return (1.0, 0.0)


@dataclass(frozen=True)
class SumObservable(Observable):
    """Real linear combination of observables."""

    terms: Sequence[tuple[float, Observable]] = field(default_factory=tuple)

    def __post_init__(self):
        flat = []
        for coeff, obs in self.terms:
            if isinstance(obs, SumObservable):
                flat.extend((coeff * c, o) for c, o in obs.terms)
            else:
                flat.append((float(coeff), obs))
        object.__setattr__(self, "terms", tuple(flat))

    def check_qubits(self, n_qubits: int) -> None:
        for _, obs in self.terms:
            obs.check_qubits(n_qubits)

    def apply_amplitudes(self, amps, n_qubits):
        out = np.zeros_like(amps)
        for coeff, obs in self.terms:
            out += coeff * obs.apply_amplitudes(amps, n_qubits)
        return out

    def expectation_amplitudes(self, amps, n_qubits):
        return sum(c * o.expectation_amplitudes(amps, n_qubits) for c, o in self.terms)

    def trace_squared(self, n_qubits: int) -> float:
        m = self.matrix(n_qubits)
        return float(np.vdot(m, m).real)

    def trace(self, n_qubits: int) -> float:
        return sum(c * o.trace(n_qubits) for c, o in self.terms)


def zz_observable() -> PauliString:
    """``Z_1 Z_2`` on the first two qubits (indices 0 and 1)."""
    return PauliString({0: "Z", 1: "Z"})


def expectation(state: Statevector, obs: Observable, atol: float = 1e-10) -> float:
    """Return ``<psi|H|psi>`` as a real number."""
    obs.check_qubits(state.n_qubits)
    if isinstance(obs, (PauliString, Projector)):
        return float(obs.expectation_amplitudes(state.amplitudes, state.n_qubits))
    value = complex(np.vdot(state.amplitudes, obs.apply_amplitudes(state.amplitudes, state.n_qubits)))
    if abs(value.imag) > atol:
        raise ValueError(f"expectation has imaginary part {value.imag:.3e}; observable not Hermitian?")
    return value.real


def shot_estimate(
    state: Statevector, obs: Observable, shots: int, rng: np.random.Generator
) -> tuple[float, float]:
    """Estimate ``<H>`` from ``shots`` simulated projective measurements.

    Outcomes are two-valued (``+-c`` for a Pauli string, 1/0 for a projector)
    and drawn from the exact outcome probabilities.

    Returns
    -------
    estimate, standard_error
        Sample mean and ``sample std / sqrt(shots)``.
    """
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if not isinstance(obs, (PauliString, Projector)):
        raise ValueError("shot estimation needs a two-outcome observable")
    if isinstance(obs, PauliString) and obs.coefficient == 0:
        raise ValueError("zero-coefficient Pauli string has no outcome distribution")
    hi, lo = obs.outcome_values
    exact = expectation(state, obs)
    p_hi = min(1.0, max(0.0, (exact - lo) / (hi - lo)))
    n_hi = int(rng.binomial(shots, p_hi))
    mean = lo + (hi - lo) * n_hi / shots
    if shots == 1:
        return mean, 0.0
    # sample std (divisor shots - 1) of a two-valued sample
    var = (hi - lo) ** 2 * n_hi * (shots - n_hi) / (shots * (shots - 1))
    return mean, math.sqrt(var / shots)
