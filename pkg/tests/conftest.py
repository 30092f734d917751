"""Brute-force reference implementations shared by the test modules.

Everything here is written the slow obvious way (explicit Kronecker
products, dense eigensolvers, Python loops) so that agreement with the
package is a meaningful cross-check rather than a tautology.
Conventions match the package: bit i set = spin up at site i,
H = -J sum sz_i sz_{i+1} + hx sum sx_i.
"""

import numpy as np
import pytest

SX = np.array([[0.0, 1.0], [1.0, 0.0]])
SZ = np.array([[1.0, 0.0], [0.0, -1.0]])
ID2 = np.eye(2)


def op_at(n, i, op):
    # site n-1 is the leftmost kron factor so that basis index == bitmask
    mats = [ID2] * n
    mats[n - 1 - i] = op
    out = mats[0]
    for m in mats[1:]:
        out = np.kron(out, m)
    return out


def reference_hamiltonian(n, j, hx, boundary):
    h = np.zeros((2**n, 2**n))
    nb = n if boundary == "periodic" else n - 1
    for i in range(nb):
        h += -j * op_at(n, i, SZ) @ op_at(n, (i + 1) % n, SZ)
    for i in range(n):
        h += hx * op_at(n, i, SX)
    return h


def reference_string_x(n):
    out = op_at(n, 0, SX)
    for i in range(1, n):
        out = out @ op_at(n, i, SX)
    return out


def reference_pair_basis(n, p):
    """Columns (|s> + p |flipped s>)/sqrt(2), one per representative s."""
    mask = (1 << n) - 1
    reps = [s for s in range(2**n) if s < (s ^ mask)]
    cols = np.zeros((2**n, len(reps)))
    for c, s in enumerate(reps):
        cols[s, c] = 1.0 / np.sqrt(2.0)
        cols[s ^ mask, c] = p / np.sqrt(2.0)
    return cols


def reference_sector_energies(n, j, hx, boundary, p):
    h = reference_hamiltonian(n, j, hx, boundary)
    cols = reference_pair_basis(n, p)
    return np.linalg.eigvalsh(cols.T @ h @ cols)


@pytest.fixture
def rng():
    return np.random.default_rng(20240813)
