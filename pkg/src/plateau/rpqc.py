"""Random parameterized quantum circuits on a 1D line of qubits.

A circuit starts with ``R_Y(pi/4)`` on every qubit (once), followed by
``n_layers`` layers. Layer ``i`` applies ``R_{P[i, j]}(theta[i, j])`` to each
qubit ``j`` and then CZ on every neighbouring pair ``(j, j + 1)``, open
boundary. The CZ gates in a ladder commute, so their order is irrelevant;
they are applied in ascending pair order.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Iterator, Sequence

import numpy as np

from ._kernels import run_layers_inplace
from .statevector import DTYPE, PAULIS, Gate, Statevector, apply_gate, cz_ladder_signs

TWO_PI = 2 * math.pi
SQRT_H_ANGLE = math.pi / 4


@dataclass(frozen=True)
class ParamIndex:
    layer: int
    qubit: int

    def flat(self, n_qubits: int) -> int:
        return self.layer * n_qubits + self.qubit

    @classmethod
    def from_flat(cls, k: int, n_qubits: int) -> "ParamIndex":
        return cls(*divmod(int(k), n_qubits))


@dataclass(frozen=True, eq=False)
class RpqcSpec:
    """One sampled circuit instance.

    ``axes`` holds one string of Pauli letters per layer, ``angles`` an
    ``(n_layers, n_qubits)`` array with entries in ``[0, 2 pi)``.
    """

    n_qubits: int
    n_layers: int
    axes: tuple[str, ...]
    angles: np.ndarray
    include_initial_sqrt_h: bool = True

    def __post_init__(self):
        if self.n_qubits < 2:
            raise ValueError(f"RPQC needs at least 2 qubits for the CZ ladder, got {self.n_qubits}")
        if self.n_layers < 1:
            raise ValueError(f"n_layers must be >= 1, got {self.n_layers}")
        axes = tuple(str(row) for row in self.axes)
        if len(axes) != self.n_layers or any(len(row) != self.n_qubits for row in axes):
            raise ValueError(f"axes must be {self.n_layers} strings of length {self.n_qubits}")
        if any(p not in PAULIS for row in axes for p in row):
            raise ValueError("axes may only contain X, Y, Z")
        angles = np.array(self.angles, dtype=np.float64)
        if angles.shape != (self.n_layers, self.n_qubits):
            raise ValueError(
                f"angles must have shape {(self.n_layers, self.n_qubits)}, got {angles.shape}"
            )
        if not np.all((angles >= 0) & (angles < TWO_PI)):
            raise ValueError("angles must lie in [0, 2pi)")
        angles.flags.writeable = False
        object.__setattr__(self, "axes", axes)
        object.__setattr__(self, "angles", angles)

    def __eq__(self, other):
        if not isinstance(other, RpqcSpec):
            return NotImplemented
        return (
            self.n_qubits == other.n_qubits
            and self.axes == other.axes
            and self.include_initial_sqrt_h == other.include_initial_sqrt_h
            and np.array_equal(self.angles, other.angles)
        )

    @property
    def n_params(self) -> int:
        return self.n_layers * self.n_qubits

    @property
    def axis_codes(self) -> np.ndarray:
        return np.array([[PAULIS.index(p) for p in row] for row in self.axes], dtype=np.int8)

    def param_indices(self) -> Iterator[ParamIndex]:
        for i in range(self.n_layers):
            for j in range(self.n_qubits):
                yield ParamIndex(i, j)

    def generator(self, k: ParamIndex) -> tuple[str, int]:
        """Pauli letter and qubit of the rotation at ``k``; the generator is half of it."""
        self.check_index(k)
        return self.axes[k.layer][k.qubit], k.qubit

    def check_index(self, k: ParamIndex) -> None:
        if not (0 <= k.layer < self.n_layers and 0 <= k.qubit < self.n_qubits):
            raise IndexError(f"{k} out of range for {self.n_layers}x{self.n_qubits} circuit")

    def to_json(self) -> str:
        doc = {
            "n_qubits": self.n_qubits,
            "n_layers": self.n_layers,
            "axes": list(self.axes),
            "angles": self.angles.tolist(),
            "include_initial_sqrt_h": self.include_initial_sqrt_h,
        }
        return json.dumps(doc, sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_json(cls, text: str) -> "RpqcSpec":
        doc = json.loads(text)
        return cls(
            n_qubits=doc["n_qubits"],
            n_layers=doc["n_layers"],
            axes=tuple(doc["axes"]),
            angles=np.array(doc["angles"], dtype=np.float64),
            include_initial_sqrt_h=doc.get("include_initial_sqrt_h", True),
        )


def sample_arrays(n_qubits: int, n_layers: int, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Axis codes (0, 1, 2 for X, Y, Z) and angles, each ``(n_layers, n_qubits)``.

    Axes are drawn before angles; :func:`sample_rpqc` wraps the same draws.
    """
    if n_qubits < 2:
        raise ValueError(f"RPQC needs at least 2 qubits, got {n_qubits}")
    if n_layers < 1:
        raise ValueError(f"n_layers must be >= 1, got {n_layers}")
    codes = rng.integers(0, 3, size=(n_layers, n_qubits))
    angles = rng.uniform(0.0, TWO_PI, size=(n_layers, n_qubits))
    # uniform() can round up to the excluded endpoint
    angles[angles >= TWO_PI] = 0.0
    return codes, angles


def sample_rpqc(
    n_qubits: int, n_layers: int, rng: np.random.Generator, include_initial_sqrt_h: bool = True
) -> RpqcSpec:
    codes, angles = sample_arrays(n_qubits, n_layers, rng)
    axes = tuple("".join(PAULIS[c] for c in row) for row in codes)
    return RpqcSpec(n_qubits, n_layers, axes, angles, include_initial_sqrt_h)


# --------------------------------------------------------------------------
# Execution
# --------------------------------------------------------------------------


def initial_amplitudes(n_qubits: int, include_sqrt_h: bool) -> np.ndarray:
    if not include_sqrt_h:
        amps = np.zeros(1 << n_qubits, dtype=DTYPE)
        amps[0] = 1.0
        return amps
    single = np.array([math.cos(math.pi / 8), math.sin(math.pi / 8)], dtype=DTYPE)
    amps = np.ones(1, dtype=DTYPE)
    for _ in range(n_qubits):
        amps = np.kron(single, amps)
    return amps


def run_layers(
    amps: np.ndarray, n_qubits: int, axis_codes: np.ndarray, angles: np.ndarray
) -> np.ndarray:
    """Apply full layers in place to a batch of states.

    ``amps`` is ``(batch, 2**n)``; ``axis_codes`` and ``angles`` are
    ``(batch, layers, n)``.
    """
    return run_layers_inplace(
        amps,
        n_qubits,
        np.ascontiguousarray(axis_codes, dtype=np.int64),
        np.ascontiguousarray(angles, dtype=np.float64),
        cz_ladder_signs(n_qubits),
    )


def execute_batch(
    n_qubits: int,
    axis_codes: np.ndarray,
    angles: np.ndarray,
    include_initial_sqrt_h: bool = True,
) -> np.ndarray:
    """Output amplitudes ``(batch, 2**n)`` for a batch of same-shape circuits."""
    axis_codes = np.asarray(axis_codes)
    angles = np.asarray(angles, dtype=np.float64)
    batch = axis_codes.shape[0]
    amps = np.tile(initial_amplitudes(n_qubits, include_initial_sqrt_h), (batch, 1))
    return run_layers(amps, n_qubits, axis_codes, angles)


def execute(spec: RpqcSpec, angles: np.ndarray | None = None) -> Statevector:
    """Return ``U(theta)|0...0>``; ``angles`` overrides the spec's (unchecked range)."""
    theta = spec.angles if angles is None else np.asarray(angles, dtype=np.float64)
    amps = execute_batch(
        spec.n_qubits, spec.axis_codes[None], theta[None], spec.include_initial_sqrt_h
    )
    return Statevector(spec.n_qubits, amps[0])


# --------------------------------------------------------------------------
# Gate programs and splitting
# --------------------------------------------------------------------------


Program = tuple[Gate, ...]


def _rotations(spec: RpqcSpec, layer: int, qubits: Sequence[int]) -> list[Gate]:
    return [Gate.rotation(spec.axes[layer][q], q, spec.angles[layer, q]) for q in qubits]


def _ladder(n_qubits: int) -> list[Gate]:
    return [Gate("CZ", (j, j + 1)) for j in range(n_qubits - 1)]


def to_program(spec: RpqcSpec) -> Program:
    gates: list[Gate] = []
    if spec.include_initial_sqrt_h:
        gates += [Gate.rotation("Y", q, SQRT_H_ANGLE) for q in range(spec.n_qubits)]
    for i in range(spec.n_layers):
        gates += _rotations(spec, i, range(spec.n_qubits))
        gates += _ladder(spec.n_qubits)
    return tuple(gates)


def split_at(spec: RpqcSpec, k: ParamIndex) -> tuple[Program, tuple[str, int], Program]:
    """Cut the circuit right after the rotation at ``k``.

    Returns ``(prefix, (pauli, qubit), suffix)``. Running ``prefix`` then
    ``suffix`` reproduces :func:`execute`. The generator of the cut rotation
    is ``pauli / 2`` on ``qubit``.
    """
    spec.check_index(k)
    n = spec.n_qubits
    prefix: list[Gate] = []
    if spec.include_initial_sqrt_h:
        prefix += [Gate.rotation("Y", q, SQRT_H_ANGLE) for q in range(n)]
    for i in range(k.layer):
        prefix += _rotations(spec, i, range(n)) + _ladder(n)
    prefix += _rotations(spec, k.layer, range(k.qubit + 1))
    suffix = _rotations(spec, k.layer, range(k.qubit + 1, n)) + _ladder(n)
    for i in range(k.layer + 1, spec.n_layers):
        suffix += _rotations(spec, i, range(n)) + _ladder(n)
    return tuple(prefix), spec.generator(k), tuple(suffix)


def run_program(program: Sequence[Gate], state: Statevector) -> Statevector:
    """Apply gates in order, in place."""
    for gate in program:
        apply_gate(state, gate)
    return state


def program_unitary(program: Sequence[Gate], n_qubits: int) -> np.ndarray:
    """Dense ``2**n x 2**n`` matrix of a gate program (column ``b`` = image of ``|b>``)."""
    dim = 1 << n_qubits
    cols = np.empty((dim, dim), dtype=DTYPE)
    for b in range(dim):
        cols[:, b] = run_program(program, Statevector.basis(n_qubits, b)).amplitudes
    return cols
