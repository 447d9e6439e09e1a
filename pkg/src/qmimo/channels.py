"""Noise processes for 2x2 and layered 2^m x 2^m links.

Three single-parameter channels act on qubit modes:

* crosstalk C_eta: swap two disjoint mode blocks with probability eta,
  ``(1-eta) rho + eta S rho S``;
* erasure E_eps: with probability eps the mode is lost and replaced by a
  flag perfectly distinguishable from any data state;
* depolarizing D_lam: with probability lam the mode is replaced by the
  maximally mixed state pi = I/2.

Erasure is tracked classically.  A ``BranchEnsemble`` is a probability
mixture over erasure patterns; each branch keeps a density matrix only on
its surviving modes.  Because the erasure flag is orthogonal to the data
space, erased modes contribute exactly zero fidelity, and no enlarged
Hilbert space is ever materialised.  Depolarizing acts only on surviving
modes of a branch, which encodes "depolarizing applies only if no erasure
occurred".

Crosstalk operates on full density matrices and must precede any erasure
stage in a pipeline; applying it to an ensemble that already contains an
erased mode raises ``PipelineOrderError``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .linalg import (
    DensityMatrix,
    DimensionError,
    PureState,
    _partial_trace_array,
    fidelity_pure,
    permute_subsystems,
)


class PipelineOrderError(ValueError):
    """A crosstalk stage was applied after an erasure removed a mode."""


def _check_unit_interval(name: str, value: float) -> float:
    value = float(value)
    if not 0.0 <= value <= 1.0:
        raise ValueError(f"{name} must lie in [0, 1], got {value!r}")
    return value


@dataclass(frozen=True)
class ChannelParams:
    """The (eta, eps, lam) noise triple of one 2x2 link."""

    eta: float
    eps: float
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "eta", _check_unit_interval("eta", self.eta))
        object.__setattr__(self, "eps", _check_unit_interval("eps", self.eps))
        object.__setattr__(self, "lam", _check_unit_interval("lam", self.lam))


@dataclass(frozen=True, eq=False)
class Branch:
    """One erasure pattern: probability, erased-mode bitmask, surviving state.

    Bit i of ``erased`` is set when mode i has been erased. ``state`` lives on
    the surviving modes in increasing mode order; when every mode is erased it
    is the trivial 1x1 matrix [[1.0]].
    """

    prob: float
    erased: int
    state: DensityMatrix

    def is_erased(self, mode: int) -> bool:
        return bool((self.erased >> mode) & 1)

    def position(self, mode: int) -> int:
        """Index of ``mode`` among the surviving modes of this branch."""
        if self.is_erased(mode):
            raise ValueError(f"mode {mode} is erased in this branch")
        below = self.erased & ((1 << mode) - 1)
        return mode - int(below).bit_count()


@dataclass(frozen=True, eq=False)
class BranchEnsemble:
    n_modes: int
    branches: tuple[Branch, ...]

    def __post_init__(self):
        if self.n_modes < 1:
            raise DimensionError("ensemble needs at least one mode")
        total = 0.0
        for br in self.branches:
            if br.prob < 0.0:
                raise ValueError(f"negative branch probability {br.prob!r}")
            if br.erased >> self.n_modes:
                raise ValueError(f"erased mask {br.erased:#x} names a mode >= {self.n_modes}")
            surviving = self.n_modes - int(br.erased).bit_count()
            if br.state.dim != (1 << surviving if surviving else 1):
                raise DimensionError(
                    f"branch with {surviving} surviving modes holds a dim-{br.state.dim} state"
                )
            total += br.prob
        if abs(total - 1.0) > 1e-10:
            raise ValueError(f"branch probabilities sum to {total!r}, expected 1")
        object.__setattr__(self, "branches", tuple(self.branches))

    @classmethod
    def from_density(cls, rho: DensityMatrix, n_modes: int) -> "BranchEnsemble":
        if rho.dim != 1 << n_modes:
            raise DimensionError(f"dim {rho.dim} is not 2^{n_modes}")
        return cls(n_modes, (Branch(1.0, 0, rho),))

    def total_prob(self) -> float:
        return float(sum(br.prob for br in self.branches))


# ---------------------------------------------------------------------------
# single-mode channels on ensembles


def _embed_mixed_at(rest: np.ndarray, pos: int, n_qubits: int) -> np.ndarray:
    """pi on subsystem ``pos`` tensored with ``rest`` on the other qubits."""
    pi = np.eye(2, dtype=np.complex128) / 2.0
    combined = np.kron(rest, pi)  # pi currently last
    perm = list(range(pos)) + [n_qubits - 1] + list(range(pos, n_qubits - 1))
    return permute_subsystems(combined, perm, [2] * n_qubits)


def depolarize(ens: BranchEnsemble, lam: float, mode: int) -> BranchEnsemble:
    """Apply D_lam to one mode of every branch where that mode survives.

    D_lam replaces the mode by pi with probability lam while leaving the
    marginal of the remaining modes untouched:
    rho -> (1-lam) rho + lam (pi_mode tensor Tr_mode rho).
    """
    lam = _check_unit_interval("lam", lam)
    _check_mode(ens, mode)
    out = []
    for br in ens.branches:
        if br.is_erased(mode):
            out.append(br)
            continue
        pos = br.position(mode)
        n = ens.n_modes - int(br.erased).bit_count()
        rho = br.state.entries
        if n == 1:
            mixed = np.eye(2, dtype=np.complex128) / 2.0
        else:
            keep = [k for k in range(n) if k != pos]
            rest = _partial_trace_array(rho, keep, [2] * n)
            mixed = _embed_mixed_at(rest, pos, n)
        out.append(Branch(br.prob, br.erased, DensityMatrix((1.0 - lam) * rho + lam * mixed)))
    return BranchEnsemble(ens.n_modes, tuple(out))


def erase(ens: BranchEnsemble, eps: float, mode: int) -> BranchEnsemble:
    """Apply E_eps to one mode: every branch where the mode survives splits
    into a kept part (weight 1-eps) and an erased part (weight eps) whose
    state is the partial trace over the lost mode.

    Branches where the mode is already erased pass through unchanged.  Parts
    with parameter weight exactly zero are not emitted, so branch counts
    depend only on the channel parameters.
    """
    eps = _check_unit_interval("eps", eps)
    _check_mode(ens, mode)
    out = []
    for br in ens.branches:
        if br.is_erased(mode):
            out.append(br)
            continue
        if eps != 1.0:
            out.append(Branch(br.prob * (1.0 - eps), br.erased, br.state))
        if eps != 0.0:
            pos = br.position(mode)
            n = ens.n_modes - int(br.erased).bit_count()
            if n == 1:
                reduced = DensityMatrix(np.array([[1.0 + 0.0j]]))
            else:
                keep = [k for k in range(n) if k != pos]
                reduced = DensityMatrix(_partial_trace_array(br.state.entries, keep, [2] * n))
            out.append(Branch(br.prob * eps, br.erased | (1 << mode), reduced))
    return BranchEnsemble(ens.n_modes, tuple(out))


def _check_mode(ens: BranchEnsemble, mode: int) -> None:
    if not 0 <= mode < ens.n_modes:
        raise DimensionError(f"mode {mode} out of range for {ens.n_modes} modes")


# ---------------------------------------------------------------------------
# crosstalk


def _block_swap_perm(n_qubits: int, block_a: Sequence[int], block_b: Sequence[int]) -> list[int]:
    a, b = list(block_a), list(block_b)
    if len(a) != len(b):
        raise DimensionError(f"crosstalk blocks have unequal sizes {len(a)} and {len(b)}")
    if not a:
        raise DimensionError("crosstalk blocks must be non-empty")
    touched = a + b
    if len(set(touched)) != len(touched):
        raise DimensionError("crosstalk blocks must be disjoint")
    if any(m < 0 or m >= n_qubits for m in touched):
        raise DimensionError(f"crosstalk block mode out of range for {n_qubits} modes")
    perm = list(range(n_qubits))
    for ma, mb in zip(a, b):
        perm[ma], perm[mb] = perm[mb], perm[ma]
    return perm


def crosstalk_mixture(
    rho: DensityMatrix, eta: float, block_a: Sequence[int], block_b: Sequence[int]
) -> DensityMatrix:
    """C_eta on two disjoint equal-size mode blocks: (1-eta) rho + eta S rho S
    with S the unitary swapping the blocks elementwise."""
    eta = _check_unit_interval("eta", eta)
    n_qubits = rho.dim.bit_length() - 1
    if 1 << n_qubits != rho.dim:
        raise DimensionError(f"crosstalk needs a qubit register, got dim {rho.dim}")
    perm = _block_swap_perm(n_qubits, block_a, block_b)
    swapped = permute_subsystems(rho.entries, perm, [2] * n_qubits)
    return DensityMatrix((1.0 - eta) * rho.entries + eta * swapped)


def crosstalk_dilation(rho: DensityMatrix, eta: float) -> DensityMatrix:
    """Unitary dilation of 2x2 crosstalk: a Fredkin gate controlled by
    sqrt(1-eta)|0> + sqrt(eta)|1>, with the control traced out afterwards.

    Equals crosstalk_mixture on the same two modes exactly (the control basis
    states are orthogonal, so all cross terms vanish under the trace).
    """
    eta = _check_unit_interval("eta", eta)
    if rho.dim != 4:
        raise DimensionError("crosstalk_dilation expects a two-qubit state")
    control = np.array([np.sqrt(1.0 - eta), np.sqrt(eta)], dtype=np.complex128)
    full = np.kron(np.outer(control, control.conj()), rho.entries)
    swap = np.eye(4, dtype=np.complex128)[[0, 2, 1, 3]]
    fredkin = np.zeros((8, 8), dtype=np.complex128)
    fredkin[:4, :4] = np.eye(4)
    fredkin[4:, 4:] = swap
    evolved = fredkin @ full @ fredkin.conj().T
    return DensityMatrix(_partial_trace_array(evolved, [1, 2], [2, 2, 2]))


# ---------------------------------------------------------------------------
# pipelines


@dataclass(frozen=True)
class CrosstalkStage:
    eta: float
    block_a: tuple[int, ...]
    block_b: tuple[int, ...]


@dataclass(frozen=True)
class EraseStage:
    eps: float
    mode: int


@dataclass(frozen=True)
class DepolarizeStage:
    lam: float
    mode: int


PipelineStage = CrosstalkStage | EraseStage | DepolarizeStage


def apply_pipeline(ens: BranchEnsemble, stages: Sequence[PipelineStage]) -> BranchEnsemble:
    """Apply stages left to right. An empty pipeline is the identity."""
    for stage in stages:
        if isinstance(stage, CrosstalkStage):
            if any(br.erased for br in ens.branches):
                raise PipelineOrderError(
                    "crosstalk must precede erasure: ensemble already has erased modes"
                )
            new = tuple(
                Branch(br.prob, 0, crosstalk_mixture(br.state, stage.eta, stage.block_a, stage.block_b))
                for br in ens.branches
            )
            ens = BranchEnsemble(ens.n_modes, new)
        elif isinstance(stage, EraseStage):
            ens = erase(ens, stage.eps, stage.mode)
        elif isinstance(stage, DepolarizeStage):
            ens = depolarize(ens, stage.lam, stage.mode)
        else:
            raise TypeError(f"unknown pipeline stage {stage!r}")
    return ens


def mode_fidelity(ens: BranchEnsemble, mode: int, psi: PureState) -> float:
    """Ensemble-average fidelity of one mode's marginal against psi.

    Branches where the mode is erased contribute exactly 0: the erasure flag
    is orthogonal to every data state.
    """
    _check_mode(ens, mode)
    total = 0.0
    for br in ens.branches:
        if br.is_erased(mode):
            continue
        n = ens.n_modes - int(br.erased).bit_count()
        pos = br.position(mode)
        if n == 1:
            marginal = br.state
        else:
            marginal = DensityMatrix(_partial_trace_array(br.state.entries, [pos], [2] * n))
        total += br.prob * fidelity_pure(marginal, psi)
    return total
