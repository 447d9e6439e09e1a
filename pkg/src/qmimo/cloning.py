"""Optimal universal 1->M qubit cloning.

The cloner output is the symmetric-subspace projection of one source copy
padded with maximally mixed qubits,

    sigma = c * P_sym (|psi><psi| tensor I^(M-1)) P_sym,

normalised to unit trace.  Each single-clone marginal has fidelity
(2M+1)/(3M) with the source state, the optimal value for a universal
symmetric cloner.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import (
    ATOL,
    SYM_CAP,
    DensityMatrix,
    DimensionError,
    PureState,
    orthogonal_complement,
    partial_trace,
    sym_projector,
)


@dataclass(frozen=True, eq=False)
class CloneBatch:
    """Joint state of M symmetric clones of one source qubit.

    Construction verifies the two defining properties: the joint state is
    supported on the symmetric subspace (P sigma P = sigma within 1e-12) and
    all single-clone marginals are identical within 1e-12.
    """

    joint: DensityMatrix
    n_clones: int
    source: PureState

    def __post_init__(self):
        if self.source.dim != 2:
            raise DimensionError("clone source must be a qubit")
        if not 1 <= self.n_clones <= SYM_CAP:
            raise DimensionError(f"clone count must be 1..{SYM_CAP}, got {self.n_clones}")
        if self.joint.dim != 1 << self.n_clones:
            raise DimensionError(
                f"joint dim {self.joint.dim} does not match {self.n_clones} clones"
            )
        proj = sym_projector(self.n_clones)
        sandwiched = proj @ self.joint.entries @ proj
        if not np.allclose(sandwiched, self.joint.entries, rtol=0.0, atol=ATOL):
            raise ValueError("clone batch is not supported on the symmetric subspace")
        first = self.marginal(0).entries
        for k in range(1, self.n_clones):
            if not np.allclose(self.marginal(k).entries, first, rtol=0.0, atol=ATOL):
                raise ValueError("clone marginals differ between output ports")

    def marginal(self, k: int) -> DensityMatrix:
        """Single-clone reduced state of output port k."""
        if self.n_clones == 1:
            return self.joint
        return partial_trace(self.joint, [k], [2] * self.n_clones)


def clone_1to2(psi: PureState) -> CloneBatch:
    """The explicit optimal 1->2 cloner output,

    sigma = 2/3 |psi psi><psi psi|
          + 1/6 (|psi psi_perp> + |psi_perp psi>)(<psi psi_perp| + <psi_perp psi|),

    whose marginals are 5/6 |psi><psi| + 1/6 |psi_perp><psi_perp|.
    """
    if psi.dim != 2:
        raise DimensionError("clone_1to2 expects a qubit")
    perp = orthogonal_complement(psi)
    both = np.kron(psi.amplitudes, psi.amplitudes)
    mixed = np.kron(psi.amplitudes, perp.amplitudes) + np.kron(perp.amplitudes, psi.amplitudes)
    joint = (2.0 / 3.0) * np.outer(both, both.conj()) + (1.0 / 6.0) * np.outer(mixed, mixed.conj())
    return CloneBatch(DensityMatrix(joint), 2, psi)


def clone_1toM(psi: PureState, n_clones: int) -> CloneBatch:
    """Symmetric-projection construction of the optimal 1->M cloner output.

    M=1 returns |psi><psi| itself; M=2 coincides with clone_1to2.
    """
    if psi.dim != 2:
        raise DimensionError("clone_1toM expects a qubit")
    if not 1 <= n_clones <= SYM_CAP:
        raise DimensionError(f"clone count must be 1..{SYM_CAP}, got {n_clones}")
    proj = sym_projector(n_clones)
    pad_dim = 1 << (n_clones - 1)
    padded = np.kron(psi.projector(), np.eye(pad_dim, dtype=np.complex128))
    joint = proj @ padded @ proj
    joint /= np.trace(joint).real  # trace is (M+1)/2 analytically
    return CloneBatch(DensityMatrix(joint), n_clones, psi)


def clone_fidelity_law(n_clones: int) -> float:
    """Per-clone fidelity of the optimal universal 1->M qubit cloner,
    (2M+1)/(3M). Pure arithmetic; valid for any M >= 1."""
    if n_clones < 1:
        raise ValueError(f"clone count must be positive, got {n_clones}")
    return (2.0 * n_clones + 1.0) / (3.0 * n_clones)
