"""Ising chain model, parity-symmetrized bases, and basic operators.

The Hamiltonian is

    H = -J sum_i sz_i sz_{i+1}  +  hx sum_i sx_i

on N spins, open or periodic. Basis states are integer bitmasks: bit i
set means spin i points up (sz eigenvalue +1), so the Ising term is
diagonal and the transverse field flips single bits.

The global flip W_X = prod_i sx_i commutes with H and has eigenvalues
+-1. No configuration is invariant under flipping every spin, so the
2^N states pair up into (s, ~s) and each parity sector has dimension
exactly 2^(N-1). Within a pair we take the member with the top bit
clear as the representative; since the flip partner of such a state
always has the top bit set, the representatives are simply
0 .. 2^(N-1)-1 and no lookup tables are needed.

Ferromagnetic regime throughout: J > 0, and perturbative statements
assume hx < J.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from enum import Enum, IntEnum

import numpy as np
from scipy.sparse import coo_array, csr_array

from .errors import CapacityError

# Building an explicit matrix beyond these sizes is almost always a
# mistake (use the matrix-free path in `ed` instead), so the builders
# refuse rather than thrash.
FULL_BASIS_MAX_SITES = 14
SECTOR_BASIS_MAX_SITES = 22

NORM_TOL = 1e-12


class Boundary(str, Enum):
    OPEN = "open"
    PERIODIC = "periodic"


class ParitySector(IntEnum):
    """Eigenvalue of the global flip W_X labeling a symmetry sector."""

    EVEN = +1
    ODD = -1


@dataclass(frozen=True)
class ChainSpec:
    """Immutable problem definition: size, couplings, boundary."""

    n_sites: int
    coupling_j: float
    field_hx: float
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if not isinstance(self.n_sites, (int, np.integer)) or self.n_sites < 2:
            raise ValueError(f"n_sites must be an integer >= 2, got {self.n_sites!r}")
        if not self.coupling_j > 0:
            raise ValueError(f"coupling_j must be > 0, got {self.coupling_j!r}")
        if self.field_hx < 0:
            raise ValueError(f"field_hx must be >= 0, got {self.field_hx!r}")
        if not isinstance(self.boundary, Boundary):
            object.__setattr__(self, "boundary", Boundary(self.boundary))

    @property
    def is_perturbative(self) -> bool:
        """True in the ferromagnetic regime hx < J where the splitting formulas apply."""
        return self.field_hx < self.coupling_j

    @property
    def n_bonds(self) -> int:
        return self.n_sites if self.boundary is Boundary.PERIODIC else self.n_sites - 1

    @property
    def dim(self) -> int:
        return 1 << self.n_sites

    @property
    def sector_dim(self) -> int:
        return 1 << (self.n_sites - 1)

    def flip_mask(self) -> int:
        """Bitmask of all sites; XOR with it applies W_X to a basis state."""
        return self.dim - 1


def domain_wall_counts(spec: ChainSpec, states: np.ndarray) -> np.ndarray:
    """Number of broken bonds (antialigned neighbor pairs) per basis state."""
    states = np.asarray(states, dtype=np.int64)
    if spec.boundary is Boundary.PERIODIC:
        # rotate right by one site so bit i of `rot` is bit (i+1 mod N) of s
        rot = (states >> 1) | ((states & 1) << (spec.n_sites - 1))
        diff = states ^ rot
    else:
        diff = (states ^ (states >> 1)) & ((1 << (spec.n_sites - 1)) - 1)
    return np.bitwise_count(diff).astype(np.int64)


def bond_energies(spec: ChainSpec, states: np.ndarray) -> np.ndarray:
    """Diagonal Ising energy -J sum sz_i sz_{i+1} for each basis state."""
    walls = domain_wall_counts(spec, states)
    return -spec.coupling_j * (spec.n_bonds - 2 * walls).astype(np.float64)


@dataclass(frozen=True)
class SymmetrizedBasis:
    """Basis of one W_X parity sector.

    Sector states are (|s> + p|~s>)/sqrt(2) indexed by the representative
    s (top bit clear). Representative a and index a coincide, which keeps
    index_of O(1) and makes the sector Hamiltonian rule tiny: flipping
    site i < N-1 maps a -> a XOR 2^i, flipping the top site lands on the
    flip partner, i.e. a -> lowmask XOR a with amplitude p.
    """

    n_sites: int
    sector: ParitySector

    def __post_init__(self):
        if self.n_sites < 2:
            raise ValueError(f"n_sites must be >= 2, got {self.n_sites}")
        if self.n_sites > SECTOR_BASIS_MAX_SITES:
            raise CapacityError(
                f"n_sites={self.n_sites} exceeds the sector basis cap "
                f"SECTOR_BASIS_MAX_SITES={SECTOR_BASIS_MAX_SITES}"
            )
        if not isinstance(self.sector, ParitySector):
            object.__setattr__(self, "sector", ParitySector(self.sector))
        # the global flip has no fixed point (the all-sites mask is nonzero),
        # so pairing is exact and no special normalization branch exists
        assert (1 << self.n_sites) - 1 != 0

    @property
    def dim(self) -> int:
        return 1 << (self.n_sites - 1)

    @property
    def representatives(self) -> np.ndarray:
        return np.arange(self.dim, dtype=np.int64)

    def index_of(self, representative: int) -> int:
        if not 0 <= representative < self.dim:
            raise ValueError(
                f"{representative} is not a sector representative for "
                f"n_sites={self.n_sites} (top bit must be clear)"
            )
        return int(representative)

    def embed(self, sector_amplitudes: np.ndarray) -> np.ndarray:
        """Lift sector amplitudes to the full 2^N basis."""
        v = np.asarray(sector_amplitudes)
        if v.shape != (self.dim,):
            raise ValueError(f"expected shape ({self.dim},), got {v.shape}")
        full = np.zeros(1 << self.n_sites, dtype=np.result_type(v, np.float64))
        inv = np.sqrt(0.5)
        full[: self.dim] = inv * v
        # flip partners of the representatives, in reversed order
        full[self.dim :] = int(self.sector) * inv * v[::-1]
        return full

    def to_json(self) -> str:
        return json.dumps(
            {
                "n_sites": self.n_sites,
                "sector": int(self.sector),
                "representatives": self.representatives.tolist(),
            }
        )


def build_parity_basis(spec: ChainSpec, sector: ParitySector) -> SymmetrizedBasis:
    return SymmetrizedBasis(n_sites=spec.n_sites, sector=ParitySector(sector))


def build_hamiltonian(spec: ChainSpec, basis: SymmetrizedBasis | None = None) -> csr_array:
    """Sparse Hamiltonian, full (basis=None) or restricted to a parity sector.

    Rows are sorted (CSR canonical form). Duplicate entries are summed,
    which matters for N=2 where the single-bit flip and the top-site flip
    hit the same matrix element.
    """
    if basis is None:
        return _full_hamiltonian(spec)
    if basis.n_sites != spec.n_sites:
        raise ValueError(
            f"basis has n_sites={basis.n_sites}, spec has n_sites={spec.n_sites}"
        )
    return _sector_hamiltonian(spec, basis)


def _full_hamiltonian(spec: ChainSpec) -> csr_array:
    n = spec.n_sites
    if n > FULL_BASIS_MAX_SITES:
        raise CapacityError(
            f"n_sites={n} exceeds the full-basis cap FULL_BASIS_MAX_SITES="
            f"{FULL_BASIS_MAX_SITES}; use a parity sector instead"
        )
    dim = spec.dim
    states = np.arange(dim, dtype=np.int64)
    rows = [states]
    cols = [states]
    vals = [bond_energies(spec, states)]
    hx = np.full(dim, spec.field_hx)
    for i in range(n):
        rows.append(states ^ (1 << i))
        cols.append(states)
        vals.append(hx)
    h = coo_array(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )
    return csr_array(h)


def _sector_hamiltonian(spec: ChainSpec, basis: SymmetrizedBasis) -> csr_array:
    n = spec.n_sites
    dim = basis.dim
    reps = basis.representatives
    lowmask = dim - 1
    rows = [reps]
    cols = [reps]
    vals = [bond_energies(spec, reps)]
    hx = np.full(dim, spec.field_hx)
    for i in range(n - 1):
        rows.append(reps ^ (1 << i))
        cols.append(reps)
        vals.append(hx)
    # top-site flip exits the representative set; its partner is the
    # bitwise complement within the low N-1 bits, picked up with weight p
    rows.append(lowmask ^ reps)
    cols.append(reps)
    vals.append(int(basis.sector) * hx)
    h = coo_array(
        (np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
        shape=(dim, dim),
    )
    return csr_array(h)


@dataclass(frozen=True)
class StateVector:
    """Normalized state, in the full basis (sector=None) or one parity sector."""

    n_sites: int
    amplitudes: np.ndarray
    sector: ParitySector | None = None

    def __post_init__(self):
        amps = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        object.__setattr__(self, "amplitudes", amps)
        expected = (1 << self.n_sites) if self.sector is None else (1 << (self.n_sites - 1))
        if amps.shape != (expected,):
            raise ValueError(
                f"amplitudes have shape {amps.shape}, expected ({expected},) for "
                f"n_sites={self.n_sites}, sector={self.sector}"
            )
        norm = float(np.linalg.norm(amps))
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} deviates from 1 by more than {NORM_TOL}")

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def to_full_basis(self) -> "StateVector":
        if self.sector is None:
            return self
        basis = SymmetrizedBasis(self.n_sites, self.sector)
        return StateVector(self.n_sites, basis.embed(self.amplitudes))

    @classmethod
    def from_bitmask(cls, n_sites: int, bits: int) -> "StateVector":
        """Product state |s> for a computational bitmask s."""
        if not 0 <= bits < (1 << n_sites):
            raise ValueError(f"bitmask {bits} out of range for n_sites={n_sites}")
        amps = np.zeros(1 << n_sites, dtype=np.complex128)
        amps[bits] = 1.0
        return cls(n_sites, amps)


def all_down_state(n_sites: int) -> StateVector:
    return StateVector.from_bitmask(n_sites, 0)


def all_up_state(n_sites: int) -> StateVector:
    return StateVector.from_bitmask(n_sites, (1 << n_sites) - 1)


def noon_state(n_sites: int, phase: float = 0.0, weights=(2**-0.5, 2**-0.5)) -> StateVector:
    """Macroscopic superposition a|all up> + b e^{i phase}|all down>.

    Weights are normalized to unit total; either weight vanishing is
    rejected, since a single-branch state is a product state, not a
    superposition.
    """
    a, b = (complex(w) for w in weights)
    nrm = np.sqrt(abs(a) ** 2 + abs(b) ** 2)
    if nrm < NORM_TOL:
        raise ValueError("weight vector is zero")
    a, b = a / nrm, b / nrm
    if abs(a) < NORM_TOL or abs(b) < NORM_TOL:
        raise ValueError("both weights must be nonzero for a superposition state")
    amps = np.zeros(1 << n_sites, dtype=np.complex128)
    amps[(1 << n_sites) - 1] = a
    amps[0] = b * np.exp(1j * phase)
    return StateVector(n_sites, amps)


def _require_full(state: StateVector, what: str) -> None:
    if state.sector is not None:
        raise ValueError(
            f"{what} acts on full-basis states; got a sector state "
            f"(sector={state.sector}); embed it with to_full_basis() first"
        )


def apply_string_x(state: StateVector) -> StateVector:
    """Apply W_X = prod_i sx_i (flips every spin)."""
    _require_full(state, "apply_string_x")
    # XOR with the all-ones mask reverses the index order
    return StateVector(state.n_sites, state.amplitudes[::-1].copy())


def parity_expectation(state: StateVector) -> float:
    """<W_X>. Sector states are eigenstates, so their label is returned exactly."""
    if state.sector is not None:
        return float(int(state.sector))
    return float(np.vdot(state.amplitudes, state.amplitudes[::-1]).real)


def string_z_expectation(state: StateVector) -> float:
    """<W_Z> with W_Z = prod_i sz_i; diagonal, sign (-1)^(# down spins)."""
    _require_full(state, "string_z_expectation")
    states = np.arange(state.dim, dtype=np.int64)
    ups = np.bitwise_count(states).astype(np.int64)
    signs = 1.0 - 2.0 * ((state.n_sites - ups) % 2)
    return float(np.sum(signs * np.abs(state.amplitudes) ** 2))


def magnetization_z(state: StateVector) -> float:
    """<sum_i sz_i>. Zero by symmetry on parity-sector states."""
    if state.sector is not None:
        # W_X anticommutes with total sz, so eigenstates have zero magnetization
        return 0.0
    states = np.arange(state.dim, dtype=np.int64)
    ups = np.bitwise_count(states).astype(np.int64)
    m = 2.0 * ups - state.n_sites
    return float(np.sum(m * np.abs(state.amplitudes) ** 2))
