"""Compiled hot loop for executing RPQC layers on a batch of states."""

import math

import numba
import numpy as np


@numba.njit(cache=True, nogil=True)
def run_layers_inplace(amps, n_qubits, axis_codes, angles, ladder_signs):
    """Apply rotation layers plus CZ ladders to each row of ``amps``.

    ``axis_codes`` uses 0, 1, 2 for X, Y, Z. Rows are processed
    independently, so results do not depend on how a batch is split.
    """
    batch, dim = amps.shape
    n_layers = axis_codes.shape[1]
    for s in range(batch):
        psi = amps[s]
        for layer in range(n_layers):
            for q in range(n_qubits):
                half = angles[s, layer, q] / 2
                c = math.cos(half)
                sn = math.sin(half)
                code = axis_codes[s, layer, q]
                stride = 1 << q
                if code == 2:
                    p0 = complex(c, -sn)
                    p1 = complex(c, sn)
                    for hi in range(0, dim, 2 * stride):
                        for lo in range(stride):
                            psi[hi + lo] *= p0
                            psi[hi + lo + stride] *= p1
                    continue
                if code == 0:
                    m00 = complex(c, 0.0)
                    m01 = complex(0.0, -sn)
                    m10 = complex(0.0, -sn)
                else:
                    m00 = complex(c, 0.0)
                    m01 = complex(-sn, 0.0)
                    m10 = complex(sn, 0.0)
                m11 = m00
                for hi in range(0, dim, 2 * stride):
                    for lo in range(stride):
                        i0 = hi + lo
                        i1 = i0 + stride
                        a0 = psi[i0]
                        a1 = psi[i1]
                        psi[i0] = m00 * a0 + m01 * a1
                        psi[i1] = m10 * a0 + m11 * a1
            for b in range(dim):
                psi[b] *= ladder_signs[b]
    return amps


def warmup():
    amps = np.zeros((1, 4), dtype=np.complex128)
    amps[0, 0] = 1
    run_layers_inplace(
        amps, 2, np.zeros((1, 1, 2), dtype=np.int64), np.zeros((1, 1, 2)), np.ones(4)
    )
