"""Fidelity engines for the 2x2 and 2^m x 2^m MIMO links.

Three mutually cross-checking routes to the same numbers:

* closed-form expressions (``analytic_*``),
* exact density-matrix simulation through the channel pipeline
  (``simulate_2x2_mux``, ``simulate_2x2_div``, ``simulate_general_density``),
* a stochastic trajectory sampler for channel counts far beyond the dense
  cap (``trajectory_estimate``).

The layered model: 2^m channels, crosstalk applied in m layers where layer i
swaps adjacent mode blocks of size 2^i (block 2k with block 2k+1) with
probability eta_i, followed by independent per-mode erasure and depolarizing.
A stream that transmits with diversity exponent x feeds 2^x clones of its
state into the contiguous mode block [0, 2^x); the receiver keeps the lowest
-index surviving port of that block.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import backend
from .channels import (
    BranchEnsemble,
    ChannelParams,
    CrosstalkStage,
    DepolarizeStage,
    EraseStage,
    apply_pipeline,
    mode_fidelity,
)
from .cloning import clone_1to2, clone_1toM, clone_fidelity_law
from .linalg import (
    DensityMatrix,
    DimensionError,
    PureState,
    RandomSource,
    _partial_trace_array,
    fidelity_pure,
    haar_state,
    maximally_mixed,
    tensor_product,
)

DENSITY_M_CAP = 3
TRAJECTORY_M_CAP = 20
_TRAJECTORY_CHUNK = 8192
_ENGINES = ("analytic", "density", "trajectory")


class EngineCapacityError(RuntimeError):
    """Requested channel count exceeds what the engine can hold."""


def _clamp_unit(name: str, value: float) -> float:
    if not -1e-9 <= value <= 1.0 + 1e-9:
        raise ValueError(f"{name} = {value!r} is not a fidelity")
    return min(max(float(value), 0.0), 1.0)


@dataclass(frozen=True)
class FidelityReport:
    """Result of one engine run.

    f12 is the cross-stream fidelity, computed for the 2x2 multiplexing case
    only.  stderr accompanies sampled estimates.  x_factor is the combined
    no-disturbance weight (1-lambda) * prod(1-eta_i) reported by the general
    closed form.
    """

    f11: float
    f12: float | None = None
    engine: str = "analytic"
    stderr: float | None = None
    x_factor: float | None = None

    def __post_init__(self):
        if self.engine not in _ENGINES:
            raise ValueError(f"engine must be one of {_ENGINES}, got {self.engine!r}")
        object.__setattr__(self, "f11", _clamp_unit("f11", self.f11))
        if self.f12 is not None:
            object.__setattr__(self, "f12", _clamp_unit("f12", self.f12))
        if self.stderr is not None and not self.stderr >= 0.0:
            raise ValueError(f"stderr must be >= 0, got {self.stderr!r}")


@dataclass(frozen=True)
class MimoConfig:
    """Layered-link description: m crosstalk layers over 2^m channels,
    diversity exponent x (2^x clones per stream, 2^(m-x) streams), one
    eta per layer, and shared per-mode erasure/depolarizing parameters.

    Schedules must be strictly decreasing (the physical assumption: deeper
    layers couple more weakly) unless ``allow_any_schedule`` is set; the
    fidelity formulas remain valid either way.
    """

    m: int
    x: int
    eta_schedule: tuple[float, ...]
    eps: float
    lam: float
    allow_any_schedule: bool = False

    def __post_init__(self):
        if not isinstance(self.m, int) or self.m < 0:
            raise ValueError(f"m must be a non-negative integer, got {self.m!r}")
        if not isinstance(self.x, int) or not 0 <= self.x <= self.m:
            raise ValueError(f"x must be an integer in [0, {self.m}], got {self.x!r}")
        schedule = tuple(float(v) for v in self.eta_schedule)
        if len(schedule) != self.m:
            raise ValueError(
                f"eta_schedule has {len(schedule)} entries, expected m = {self.m}"
            )
        for i, eta in enumerate(schedule):
            if not 0.0 <= eta <= 1.0:
                raise ValueError(f"eta_schedule[{i}] must lie in [0, 1], got {eta!r}")
        if not self.allow_any_schedule:
            for i in range(self.m - 1):
                if not schedule[i] > schedule[i + 1]:
                    raise ValueError(
                        "eta_schedule must be strictly decreasing "
                        "(pass allow_any_schedule to override)"
                    )
        object.__setattr__(self, "eta_schedule", schedule)
        if not 0.0 <= self.eps <= 1.0:
            raise ValueError(f"eps must lie in [0, 1], got {self.eps!r}")
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError(f"lam must lie in [0, 1], got {self.lam!r}")

    @classmethod
    def geometric(
        cls,
        m: int,
        x: int,
        eps: float,
        lam: float,
        eta0: float,
        decay: float,
        allow_any_schedule: bool = False,
    ) -> "MimoConfig":
        """Build the geometric schedule eta_i = eta0 / decay**i."""
        if not decay > 0.0:
            raise ValueError(f"decay must be positive, got {decay!r}")
        schedule = tuple(eta0 / decay**i for i in range(m))
        return cls(m, x, schedule, eps, lam, allow_any_schedule)

    @property
    def n_channels(self) -> int:
        return 1 << self.m

    @property
    def n_clones(self) -> int:
        return 1 << self.x

    @property
    def n_streams(self) -> int:
        return 1 << (self.m - self.x)


# ---------------------------------------------------------------------------
# closed forms


def _mux_formula(eta: float, eps: float, lam: float) -> float:
    return 0.5 * (1.0 - eps) * (1.0 + (1.0 - eta) * (1.0 - lam))


def analytic_mux_fidelity(p: ChannelParams, csi_swap: bool = False) -> FidelityReport:
    """Direct 2x2 multiplexing fidelities.

    f11 = (1/2)(1-eps)[1 + (1-eta)(1-lam)] is the own-stream fidelity at the
    matching receiver; f12 = (1/2)(1-eps)[1 + eta(1-lam)] is the fidelity of
    the stream observed at the other receiver.  With ``csi_swap`` the
    receivers exchange ports when eta > 0.5, which evaluates the own-stream
    formula at min(eta, 1-eta) and the cross formula at max(eta, 1-eta).
    """
    eta11 = min(p.eta, 1.0 - p.eta) if csi_swap else p.eta
    eta12 = max(p.eta, 1.0 - p.eta) if csi_swap else 1.0 - p.eta
    return FidelityReport(
        f11=_mux_formula(eta11, p.eps, p.lam),
        f12=_mux_formula(eta12, p.eps, p.lam),
        engine="analytic",
    )


def analytic_div_fidelity(p: ChannelParams) -> FidelityReport:
    """Cloning-based 2x2 diversity fidelity (1-eps^2)(5/6 - lam/3).

    Independent of eta: the two clones are symmetric, so swapping them is a
    no-op.  Both receivers relay the same kept clone, hence f12 = f11.
    """
    f = (1.0 - p.eps * p.eps) * (5.0 / 6.0 - p.lam / 3.0)
    return FidelityReport(f11=f, f12=f, engine="analytic")


def analytic_general_fidelity(cfg: MimoConfig) -> FidelityReport:
    """Closed form for the layered link:

        F = (1 - eps^(2^x)) [ X * F_clone(2^x) + (1 - X)/2 ],
        X = (1 - lam) * prod_{i=x}^{m-1} (1 - eta_i).

    Only the layers at and above the clone-group size can move the group;
    crosstalk inside the group permutes identical clones and drops out.
    Reduces to the 2x2 multiplexing formula at (m=1, x=0) and to the 2x2
    diversity formula at (m=1, x=1).
    """
    x_factor = (1.0 - cfg.lam) * math.prod(1.0 - e for e in cfg.eta_schedule[cfg.x :])
    arrival = 1.0 - cfg.eps**cfg.n_clones
    f = arrival * (x_factor * clone_fidelity_law(cfg.n_clones) + 0.5 * (1.0 - x_factor))
    return FidelityReport(f11=f, engine="analytic", x_factor=x_factor)


# ---------------------------------------------------------------------------
# 2x2 density-matrix engine


def _pipeline_2x2(p: ChannelParams) -> list:
    return [
        CrosstalkStage(p.eta, (0,), (1,)),
        EraseStage(p.eps, 0),
        EraseStage(p.eps, 1),
        DepolarizeStage(p.lam, 0),
        DepolarizeStage(p.lam, 1),
    ]


def simulate_2x2_mux_exact(psi0: PureState, p: ChannelParams) -> FidelityReport:
    """Deterministic multiplexing run with the Haar average pi substituted
    for the other stream's input (the exact mean over Haar samples)."""
    joint = tensor_product(DensityMatrix.from_pure(psi0), maximally_mixed())
    ens = apply_pipeline(BranchEnsemble.from_density(joint, 2), _pipeline_2x2(p))
    return FidelityReport(f11=mode_fidelity(ens, 0, psi0), engine="density")


def simulate_2x2_mux(
    psi0: PureState, p: ChannelParams, n_samples: int, gen: np.random.Generator
) -> FidelityReport:
    """Monte Carlo multiplexing run: the other stream's input is a fresh Haar
    state per sample; reports the sample mean and its standard error."""
    if n_samples < 1:
        raise ValueError(f"n_samples must be positive, got {n_samples!r}")
    stages = _pipeline_2x2(p)
    own = DensityMatrix.from_pure(psi0)
    samples = np.empty(n_samples)
    for i in range(n_samples):
        other = DensityMatrix.from_pure(haar_state(2, gen))
        ens = apply_pipeline(BranchEnsemble.from_density(tensor_product(own, other), 2), stages)
        samples[i] = mode_fidelity(ens, 0, psi0)
    stderr = float(np.std(samples, ddof=1) / math.sqrt(n_samples)) if n_samples > 1 else 0.0
    return FidelityReport(f11=float(np.mean(samples)), engine="density", stderr=stderr)


def receiver_select(ens: BranchEnsemble, ports) -> tuple[int | None, ...]:
    """Per-branch receiver decision: keep the lowest-index surviving port of
    ``ports``; None marks branches where every port was erased."""
    ports = list(ports)
    if not ports:
        raise ValueError("ports must be non-empty")
    picks: list[int | None] = []
    for br in ens.branches:
        kept = None
        for port in ports:
            if not br.is_erased(port):
                kept = port
                break
        picks.append(kept)
    return tuple(picks)


def _selected_fidelity(ens: BranchEnsemble, ports, psi: PureState) -> float:
    total = 0.0
    for br, kept in zip(ens.branches, receiver_select(ens, ports)):
        if kept is None:
            continue
        n = ens.n_modes - int(br.erased).bit_count()
        pos = br.position(kept)
        if n == 1:
            marginal = br.state
        else:
            marginal = DensityMatrix(_partial_trace_array(br.state.entries, [pos], [2] * n))
        total += br.prob * fidelity_pure(marginal, psi)
    return total


def _div_ensemble(psi0: PureState, p: ChannelParams) -> BranchEnsemble:
    joint = clone_1to2(psi0).joint
    return apply_pipeline(BranchEnsemble.from_density(joint, 2), _pipeline_2x2(p))


def simulate_2x2_div(psi0: PureState, p: ChannelParams) -> FidelityReport:
    """Deterministic cloning-diversity run: clone 1->2, push both clones
    through the channel pipeline, keep the lowest-index surviving clone."""
    ens = _div_ensemble(psi0, p)
    return FidelityReport(f11=_selected_fidelity(ens, (0, 1), psi0), engine="density")


def post_channel_clone_state(psi0: PureState, p: ChannelParams) -> DensityMatrix:
    """Reduced state of the kept clone, conditioned on at least one clone
    arriving. Matches (5/6)(1-lam)|psi><psi| + (1/6)(1-lam)|perp><perp| +
    lam I/2 for every eta and eps < 1."""
    ens = _div_ensemble(psi0, p)
    weight = 0.0
    acc = np.zeros((2, 2), dtype=np.complex128)
    for br, kept in zip(ens.branches, receiver_select(ens, (0, 1))):
        if kept is None:
            continue
        n = ens.n_modes - int(br.erased).bit_count()
        pos = br.position(kept)
        marginal = br.state.entries if n == 1 else _partial_trace_array(br.state.entries, [pos], [2] * n)
        acc += br.prob * marginal
        weight += br.prob
    if weight <= 0.0:
        raise ValueError("no clone ever survives (eps = 1); conditional state undefined")
    return DensityMatrix(acc / weight)


# ---------------------------------------------------------------------------
# layered density-matrix engine


def _layer_stages(cfg: MimoConfig) -> list[CrosstalkStage]:
    stages = []
    for layer in range(cfg.m):
        size = 1 << layer
        for pair in range(cfg.n_channels // (2 * size)):
            start = 2 * pair * size
            block_a = tuple(range(start, start + size))
            block_b = tuple(range(start + size, start + 2 * size))
            stages.append(CrosstalkStage(cfg.eta_schedule[layer], block_a, block_b))
    return stages


def simulate_general_density(cfg: MimoConfig, psi0: PureState) -> FidelityReport:
    """Exact density-matrix run of the layered link for m <= 3.

    The target stream's 2^x clones occupy modes [0, 2^x).  Every other
    stream's mode holds pi: crosstalk branches are mode permutations, so the
    target fidelity sees other streams only through their Haar-averaged
    single-mode marginals, which are exactly pi.
    """
    if cfg.m > DENSITY_M_CAP:
        raise EngineCapacityError(
            f"density engine caps at m = {DENSITY_M_CAP} (got m = {cfg.m}); "
            "use the trajectory engine"
        )
    state = clone_1toM(psi0, cfg.n_clones).joint
    for _ in range(cfg.n_channels - cfg.n_clones):
        state = tensor_product(state, maximally_mixed())
    ens = BranchEnsemble.from_density(state, cfg.n_channels)
    stages: list = _layer_stages(cfg)
    stages += [EraseStage(cfg.eps, mode) for mode in range(cfg.n_channels)]
    stages += [DepolarizeStage(cfg.lam, mode) for mode in range(cfg.n_channels)]
    ens = apply_pipeline(ens, stages)
    fid = _selected_fidelity(ens, range(cfg.n_clones), psi0)
    return FidelityReport(f11=fid, engine="density")


# ---------------------------------------------------------------------------
# trajectory engine


def trajectory_estimate(
    cfg: MimoConfig, n_samples: int, rng: RandomSource, threads: int | None = None
) -> FidelityReport:
    """Stochastic unraveling of the layered link for m up to 20.

    Each trajectory draws the erasure outcome of the clone group, one
    block-swap event per layer above the group, and the depolarizing event on
    the kept port, then scores F_clone(2^x) for an intact clone, 1/2 for
    depolarized or swapped-in foreign content, and 0 when every clone port
    was erased.  Unbiased for analytic_general_fidelity.

    Sampling is partitioned into fixed-size chunks with per-chunk derived
    random streams, so the result is independent of the worker count.
    """
    if cfg.m > TRAJECTORY_M_CAP:
        raise EngineCapacityError(
            f"trajectory engine caps at m = {TRAJECTORY_M_CAP} (got m = {cfg.m})"
        )
    if n_samples < 1:
        raise ValueError(f"n_samples must be positive, got {n_samples!r}")
    etas = np.asarray(cfg.eta_schedule[cfg.x :], dtype=np.float64)
    p_all_erased = float(cfg.eps) ** cfg.n_clones
    f_clone = clone_fidelity_law(cfg.n_clones)
    lam = float(cfg.lam)

    sizes = [
        min(_TRAJECTORY_CHUNK, n_samples - start)
        for start in range(0, n_samples, _TRAJECTORY_CHUNK)
    ]

    def run_chunk(task: int) -> tuple[int, int]:
        gen = rng.task_generator(task)
        uniforms = gen.random((sizes[task], etas.shape[0] + 2))
        return backend.trajectory_tally(uniforms, p_all_erased, etas, lam)

    workers = threads if threads is not None else (os.cpu_count() or 1)
    if workers < 1:
        raise ValueError(f"threads must be positive, got {threads!r}")
    if workers == 1 or len(sizes) == 1:
        tallies = [run_chunk(t) for t in range(len(sizes))]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            tallies = list(pool.map(run_chunk, range(len(sizes))))

    n_clone = sum(t[0] for t in tallies)
    n_half = sum(t[1] for t in tallies)
    n_zero = n_samples - n_clone - n_half
    mean = f_clone * (n_clone / n_samples) + 0.5 * (n_half / n_samples)
    if n_samples > 1:
        ssd = (
            n_clone * (f_clone - mean) ** 2
            + n_half * (0.5 - mean) ** 2
            + n_zero * mean**2
        )
        stderr = math.sqrt(ssd / (n_samples - 1) / n_samples)
    else:
        stderr = 0.0
    return FidelityReport(f11=mean, engine="trajectory", stderr=stderr)
