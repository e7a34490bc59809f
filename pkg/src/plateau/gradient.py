"""Single-direction gradients of ``E(theta) = <0|U(theta)^dag H U(theta)|0>``.

Three independent routes:

* commutator: ``i <phi|[V, U+^dag H U+]|phi>`` with ``V = P/2`` inserted at
  the cut produced by :func:`plateau.rpqc.split_at`,
* parameter shift: ``(E(theta_k + pi/2) - E(theta_k - pi/2)) / 2``, exact
  for half-angle Pauli rotations,
* central finite differences (test oracle).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .rpqc import ParamIndex, RpqcSpec, execute, execute_batch, run_program, split_at
from .statevector import Observable, Statevector, apply_pauli, expectation

DEFAULT_FD_STEP = 1e-4


class Method(str, Enum):
    COMMUTATOR = "commutator"
    PARAMETER_SHIFT = "parameter_shift"
    FINITE_DIFFERENCE = "finite_difference"


@dataclass(frozen=True)
class GradientSample:
    value: float
    k: ParamIndex
    method: Method
    spec_seed: int | None = None

    def __post_init__(self):
        if not math.isfinite(self.value):
            raise ValueError(f"gradient value must be finite, got {self.value}")


def energy(spec: RpqcSpec, obs: Observable, angles: np.ndarray | None = None) -> float:
    return expectation(execute(spec, angles), obs)


def _shifted_energy(spec: RpqcSpec, k: ParamIndex, obs: Observable, shift: float) -> float:
    spec.check_index(k)
    angles = spec.angles.copy()
    angles[k.layer, k.qubit] += shift
    return energy(spec, obs, angles)


def grad_commutator(spec: RpqcSpec, k: ParamIndex, obs: Observable) -> float:
    """``2 Im <phi| U+^dag H U+ V |phi>`` with ``|phi> = U-|0>``."""
    obs.check_qubits(spec.n_qubits)
    prefix, (pauli, qubit), suffix = split_at(spec, k)
    phi = run_program(prefix, Statevector.zero(spec.n_qubits))
    v_phi = apply_pauli(phi.copy(), pauli, qubit)
    v_phi.amplitudes *= 0.5
    run_program(suffix, phi)
    run_program(suffix, v_phi)
    h_v_phi = obs.apply_amplitudes(v_phi.amplitudes, spec.n_qubits)
    return 2.0 * float(np.vdot(phi.amplitudes, h_v_phi).imag)


def grad_parameter_shift(spec: RpqcSpec, k: ParamIndex, obs: Observable) -> float:
    plus = _shifted_energy(spec, k, obs, math.pi / 2)
    minus = _shifted_energy(spec, k, obs, -math.pi / 2)
    return (plus - minus) / 2


def grad_finite_difference(
    spec: RpqcSpec, k: ParamIndex, obs: Observable, h: float = DEFAULT_FD_STEP
) -> float:
    """Central difference; truncation error is O(h**2)."""
    if not 0 < h <= 1e-3:
        raise ValueError(f"finite-difference step must be in (0, 1e-3], got {h}")
    plus = _shifted_energy(spec, k, obs, h)
    minus = _shifted_energy(spec, k, obs, -h)
    return (plus - minus) / (2 * h)


GRADIENT_METHODS = {
    Method.COMMUTATOR: grad_commutator,
    Method.PARAMETER_SHIFT: grad_parameter_shift,
    Method.FINITE_DIFFERENCE: grad_finite_difference,
}


def gradient(spec: RpqcSpec, k: ParamIndex, obs: Observable, method=Method.PARAMETER_SHIFT) -> float:
    return GRADIENT_METHODS[Method(method)](spec, k, obs)


def parameter_shift_batch(
    n_qubits: int,
    axis_codes: np.ndarray,
    angles: np.ndarray,
    k_flat: int,
    obs: Observable,
    include_initial_sqrt_h: bool = True,
) -> np.ndarray:
    """Parameter-shift gradients for a batch of circuits sharing shape and ``k``."""
    obs.check_qubits(n_qubits)
    layer, qubit = divmod(k_flat, n_qubits)
    batch = axis_codes.shape[0]
    codes = np.concatenate([axis_codes, axis_codes])
    shifted = np.concatenate([angles, angles])
    shifted[:batch, layer, qubit] += math.pi / 2
    shifted[batch:, layer, qubit] -= math.pi / 2
    amps = execute_batch(n_qubits, codes, shifted, include_initial_sqrt_h)
    values = obs.expectation_amplitudes(amps, n_qubits)
    return (values[:batch] - values[batch:]) / 2
