"""Dense complex linear algebra for small multi-qubit registers.

Index convention used everywhere in this package: subsystem 0 is the most
significant tensor factor.  The computational basis state |b0 b1 ... b_{n-1}>
therefore sits at integer index b0*2^{n-1} + b1*2^{n-2} + ... + b_{n-1}, and
``np.kron(a, b)`` places ``a`` on the most significant side.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

# Numerical contracts shared by the whole package.
ATOL = 1e-12        # algebraic identities (hermiticity, norms, state equality)
TRACE_ATOL = 1e-10  # trace normalisation of density matrices
PSD_ATOL = 1e-10    # eigenvalue floor: lambda_min >= -PSD_ATOL
MAX_DIM = 256       # exact simulation cap: 8 qubits of dense algebra
SYM_CAP = 8         # largest register for symmetric-subspace projectors


class DimensionError(ValueError):
    """Operand dimensions are inconsistent or exceed the dense-algebra cap."""


@dataclass(frozen=True, eq=False)
class PureState:
    """Normalised state vector. Amplitudes are stored read-only."""

    amplitudes: np.ndarray

    def __post_init__(self):
        amp = np.array(self.amplitudes, dtype=np.complex128).reshape(-1)
        if amp.shape[0] < 1:
            raise DimensionError("empty state vector")
        norm_sq = float(np.vdot(amp, amp).real)
        if abs(norm_sq - 1.0) > ATOL:
            raise ValueError(f"state vector has squared norm {norm_sq!r}, expected 1")
        amp.setflags(write=False)
        object.__setattr__(self, "amplitudes", amp)

    @property
    def dim(self) -> int:
        return self.amplitudes.shape[0]

    def projector(self) -> np.ndarray:
        return np.outer(self.amplitudes, self.amplitudes.conj())


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    """Hermitian, unit-trace, positive-semidefinite operator.

    Invariants are enforced on construction: hermiticity within ATOL, trace 1
    within TRACE_ATOL, and all eigenvalues >= -PSD_ATOL.
    """

    entries: np.ndarray

    def __post_init__(self):
        mat = np.array(self.entries, dtype=np.complex128)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise DimensionError(f"density matrix must be square, got shape {mat.shape}")
        if mat.shape[0] > MAX_DIM:
            raise DimensionError(f"dimension {mat.shape[0]} exceeds cap {MAX_DIM}")
        if not np.allclose(mat, mat.conj().T, rtol=0.0, atol=ATOL):
            raise ValueError("density matrix is not Hermitian within 1e-12")
        trace = complex(np.trace(mat))
        if abs(trace - 1.0) > TRACE_ATOL:
            raise ValueError(f"density matrix has trace {trace!r}, expected 1")
        if float(np.linalg.eigvalsh(mat)[0]) < -PSD_ATOL:
            raise ValueError("density matrix has an eigenvalue below -1e-10")
        mat.setflags(write=False)
        object.__setattr__(self, "entries", mat)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    @classmethod
    def from_pure(cls, psi: PureState) -> "DensityMatrix":
        return cls(psi.projector())


@dataclass(frozen=True)
class RandomSource:
    """Deterministic randomness handle: a (seed, stream) pair.

    Identical (seed, stream) pairs always reproduce the same sample sequence.
    Workers derive independent substreams with ``spawn_key=(stream, task)``;
    see ``generator``.
    """

    seed: int
    stream: int = 0

    def __post_init__(self):
        if self.seed < 0 or self.stream < 0:
            raise ValueError("seed and stream must be non-negative integers")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(self.stream,))
        )

    def task_generator(self, task_index: int) -> np.random.Generator:
        """Generator for one parallel task, independent of all other tasks."""
        return np.random.default_rng(
            np.random.SeedSequence(self.seed, spawn_key=(self.stream, task_index))
        )


def tensor_product(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    """Kronecker product with ``a`` on the most significant index."""
    if a.dim * b.dim > MAX_DIM:
        raise DimensionError(
            f"tensor product dimension {a.dim * b.dim} exceeds cap {MAX_DIM}"
        )
    return DensityMatrix(np.kron(a.entries, b.entries))


def _partial_trace_array(mat: np.ndarray, keep: Sequence[int], dims: Sequence[int]) -> np.ndarray:
    n = len(dims)
    tensor = mat.reshape(tuple(dims) + tuple(dims))
    keep = list(keep)
    row_sub = [0] * n
    col_sub = [0] * n
    out_sub = []
    next_label = 0
    for k in range(n):
        if k in keep:
            row_sub[k] = next_label
            col_sub[k] = next_label + 1
            next_label += 2
        else:
            row_sub[k] = next_label
            col_sub[k] = next_label
            next_label += 1
    # output indices: kept rows (original order) then kept columns
    out_sub = [row_sub[k] for k in keep] + [col_sub[k] for k in keep]
    reduced = np.einsum(tensor, row_sub + col_sub, out_sub)
    kept_dim = int(np.prod([dims[k] for k in keep]))
    return reduced.reshape(kept_dim, kept_dim)


def partial_trace(rho: DensityMatrix, keep: Sequence[int], dims: Sequence[int]) -> DensityMatrix:
    """Trace out every subsystem not listed in ``keep``.

    ``dims`` lists the subsystem dimensions most-significant first; kept
    subsystems retain their relative order.
    """
    if int(np.prod(dims)) != rho.dim:
        raise DimensionError(f"dims {list(dims)} do not multiply to {rho.dim}")
    keep = list(keep)
    if len(keep) == 0:
        raise DimensionError("keep must name at least one subsystem")
    if len(set(keep)) != len(keep) or any(k < 0 or k >= len(dims) for k in keep):
        raise DimensionError(f"invalid keep list {keep} for {len(dims)} subsystems")
    return DensityMatrix(_partial_trace_array(rho.entries, keep, dims))


def permute_subsystems(mat, perm: Sequence[int], dims: Sequence[int]):
    """Relabel subsystems of an operator: output subsystem q is input
    subsystem perm[q].  Accepts a raw matrix or a DensityMatrix and returns
    the same kind."""
    wrap = isinstance(mat, DensityMatrix)
    entries = mat.entries if wrap else mat
    n = len(dims)
    if sorted(perm) != list(range(n)):
        raise DimensionError(f"perm {list(perm)} is not a permutation of 0..{n - 1}")
    tensor = entries.reshape(tuple(dims) + tuple(dims))
    axes = list(perm) + [n + p for p in perm]
    new_dims = [dims[p] for p in perm]
    full = int(np.prod(new_dims))
    out = np.ascontiguousarray(np.transpose(tensor, axes)).reshape(full, full)
    return DensityMatrix(out) if wrap else out


def fidelity_pure(rho: DensityMatrix, psi: PureState) -> float:
    """<psi|rho|psi>. Raises if the imaginary residue exceeds ATOL."""
    if rho.dim != psi.dim:
        raise DimensionError(f"state dim {psi.dim} does not match operator dim {rho.dim}")
    val = complex(np.vdot(psi.amplitudes, rho.entries @ psi.amplitudes))
    if abs(val.imag) > ATOL:
        raise ValueError(f"fidelity has imaginary residue {val.imag!r}")
    return val.real


def haar_state(dim: int, gen: np.random.Generator) -> PureState:
    """Haar-random pure state: i.i.d. standard complex Gaussian amplitudes, normalised."""
    if dim < 2:
        raise DimensionError("haar_state needs dim >= 2")
    amp = gen.standard_normal(dim) + 1j * gen.standard_normal(dim)
    return PureState(amp / np.linalg.norm(amp))


def orthogonal_complement(psi: PureState) -> PureState:
    """The unique (up to phase) qubit state orthogonal to psi; phase fixed by
    (alpha, beta) -> (-conj(beta), conj(alpha))."""
    if psi.dim != 2:
        raise DimensionError("orthogonal_complement is defined for qubits only")
    a, b = psi.amplitudes
    return PureState(np.array([-np.conj(b), np.conj(a)]))


@lru_cache(maxsize=None)
def sym_projector(n_qubits: int) -> np.ndarray:
    """Orthogonal projector onto the symmetric subspace of ``n_qubits`` qubits,
    built as the average of all n! subsystem-permutation operators.

    Idempotent, trace n_qubits + 1. The returned array is cached and read-only.
    """
    if not 1 <= n_qubits <= SYM_CAP:
        raise DimensionError(f"sym_projector supports 1..{SYM_CAP} qubits, got {n_qubits}")
    dim = 1 << n_qubits
    shifts = np.arange(n_qubits - 1, -1, -1)
    bits = (np.arange(dim)[:, None] >> shifts[None, :]) & 1  # bits[j, k] = subsystem-k bit of j
    weights = 1 << shifts
    proj = np.zeros((dim, dim), dtype=np.complex128)
    cols = np.arange(dim)
    for perm in itertools.permutations(range(n_qubits)):
        rows = bits[:, perm] @ weights  # image of each basis column; a bijection
        proj[rows, cols] += 1.0
    proj /= math.factorial(n_qubits)
    proj.setflags(write=False)
    return proj


def maximally_mixed(n_qubits: int = 1) -> DensityMatrix:
    dim = 1 << n_qubits
    return DensityMatrix(np.eye(dim, dtype=np.complex128) / dim)


def basis_state(index: int, dim: int) -> PureState:
    amp = np.zeros(dim, dtype=np.complex128)
    amp[index] = 1.0
    return PureState(amp)
