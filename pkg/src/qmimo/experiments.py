"""Reproduction drivers: diversity-gain region scan, diversity–multiplexing
tradeoff curves, and the Monte-Carlo-vs-closed-form verification sweep.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from . import backend
from .channels import ChannelParams
from .linalg import RandomSource, haar_state
from .mimo import (
    MimoConfig,
    analytic_div_fidelity,
    analytic_general_fidelity,
    analytic_mux_fidelity,
    simulate_2x2_div,
    simulate_2x2_mux,
)

SWEEP_POINTS = 21
DMT_M_CAP = 20


def _check_range(name: str, rng: tuple[float, float], hi_cap: float) -> tuple[float, float]:
    lo, hi = (float(rng[0]), float(rng[1]))
    if not (0.0 <= lo <= hi <= hi_cap):
        raise ValueError(f"{name} must satisfy 0 <= lo <= hi <= {hi_cap}, got {rng!r}")
    return lo, hi


@dataclass(frozen=True)
class GridSpec:
    """Uniform inclusive grid over the channel-parameter box.

    Default ranges cover the full valid region: eta in [0, 0.5] (beyond 0.5
    the CSI port swap maps back), eps and lambda in [0, 1].  200 points per
    axis reproduces the 8.0e6-point reference grid.
    """

    points_per_axis: int
    eta_range: tuple[float, float] = (0.0, 0.5)
    eps_range: tuple[float, float] = (0.0, 1.0)
    lambda_range: tuple[float, float] = (0.0, 1.0)

    def __post_init__(self):
        if not isinstance(self.points_per_axis, int) or self.points_per_axis < 1:
            raise ValueError(
                f"points_per_axis must be a positive integer, got {self.points_per_axis!r}"
            )
        object.__setattr__(self, "eta_range", _check_range("eta_range", self.eta_range, 0.5))
        object.__setattr__(self, "eps_range", _check_range("eps_range", self.eps_range, 1.0))
        object.__setattr__(
            self, "lambda_range", _check_range("lambda_range", self.lambda_range, 1.0)
        )

    def axes(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        n = self.points_per_axis
        return (
            np.linspace(self.eta_range[0], self.eta_range[1], n),
            np.linspace(self.eps_range[0], self.eps_range[1], n),
            np.linspace(self.lambda_range[0], self.lambda_range[1], n),
        )

    @property
    def grid_points(self) -> int:
        return self.points_per_axis**3


@dataclass(frozen=True)
class RegionScan:
    """Outcome of a region scan: how much of the grid the cloning strategy
    wins (strictly higher fidelity than direct multiplexing; ties count as
    no-gain)."""

    fraction: float
    gain_points: int
    grid_points: int

    def __post_init__(self):
        if not 0.0 <= self.fraction <= 1.0:
            raise ValueError(f"fraction must lie in [0, 1], got {self.fraction!r}")


def region_scan(grid: GridSpec) -> RegionScan:
    """Count grid points where the cloning-diversity fidelity strictly beats
    the direct-multiplexing fidelity f11 (no CSI swap; eta <= 0.5 keeps the
    swap inactive anyway)."""
    etas, epss, lams = grid.axes()
    gain_points = backend.region_gain_count(etas, epss, lams)
    return RegionScan(
        fraction=gain_points / grid.grid_points,
        gain_points=gain_points,
        grid_points=grid.grid_points,
    )


def iter_region_rows(grid: GridSpec) -> Iterator[tuple[float, float, float, float, float, int]]:
    """Stream (eta, eps, lambda, f_mux, f_div, gain) rows in eta-major order.

    Uses the same arithmetic as the counting kernel, so summing the gain
    column reproduces region_scan().gain_points exactly.
    """
    etas, epss, lams = grid.axes()
    one_minus_lam = 1.0 - lams
    f_div = (1.0 - epss * epss)[:, None] * (5.0 / 6.0 - lams / 3.0)[None, :]
    half_keep = (0.5 * (1.0 - epss))[:, None]
    for eta in etas:
        f_mux = half_keep * (1.0 + (1.0 - eta) * one_minus_lam)[None, :]
        gain = f_div > f_mux
        for i, eps in enumerate(epss):
            for j, lam in enumerate(lams):
                yield (
                    float(eta),
                    float(eps),
                    float(lam),
                    float(f_mux[i, j]),
                    float(f_div[i, j]),
                    int(gain[i, j]),
                )


@dataclass(frozen=True)
class DmtPoint:
    """One point on the diversity–multiplexing tradeoff curve: diversity
    exponent x buys diversity order 2^x and costs rate, leaving 2^(m-x)
    parallel streams."""

    m: int
    x: int
    streams: int
    diversity_order: int
    log2_streams: int
    fidelity: float

    def __post_init__(self):
        if self.streams * self.diversity_order != 1 << self.m:
            raise ValueError(
                f"streams * diversity_order must equal 2^m, got "
                f"{self.streams} * {self.diversity_order} != {1 << self.m}"
            )
        if not 0.0 <= self.fidelity <= 1.0:
            raise ValueError(f"fidelity must lie in [0, 1], got {self.fidelity!r}")


def dmt_sweep(m: int, eps: float, lam: float, eta0: float, decay: float) -> list[DmtPoint]:
    """Evaluate the tradeoff curve for the geometric crosstalk schedule
    eta_i = eta0 / decay**i: one point per diversity exponent x = 0..m.

    The schedule is passed through unchecked for monotonicity (eta0 = 0 or
    decay <= 1 give flat or growing schedules, which the closed form handles
    fine).
    """
    if not isinstance(m, int) or not 1 <= m <= DMT_M_CAP:
        raise ValueError(f"m must be an integer in [1, {DMT_M_CAP}], got {m!r}")
    points = []
    for x in range(m + 1):
        cfg = MimoConfig.geometric(m, x, eps, lam, eta0, decay, allow_any_schedule=True)
        report = analytic_general_fidelity(cfg)
        points.append(
            DmtPoint(
                m=m,
                x=x,
                streams=cfg.n_streams,
                diversity_order=cfg.n_clones,
                log2_streams=m - x,
                fidelity=report.f11,
            )
        )
    return points


@dataclass(frozen=True)
class VerifyRow:
    """One row of the sweep report: a fidelity from one (strategy, engine)
    pair at one swept-parameter value.  n_samples is 0 for closed forms,
    1 for the deterministic cloning run, n_mux for the Monte Carlo column."""

    swept_param: str
    value: float
    strategy: str
    engine: str
    fidelity: float
    stderr: float
    n_samples: int


_SWEPT_PARAMS = ("eta", "eps", "lambda")


def mc_verify(p: ChannelParams, n_mux: int, rng: RandomSource) -> list[VerifyRow]:
    """Regenerate the three 1-D fidelity sweeps: vary one of eta, eps, lambda
    over [0, 1] in 21 uniform steps while the other two stay at their values
    in ``p``; report analytic and simulated fidelities for both strategies.

    The multiplexing simulation averages n_mux Haar draws of the interfering
    stream; the cloning simulation is deterministic, so a single run per
    point suffices and its stderr is exactly 0.  All sampling consumes one
    sequential generator derived from ``rng``, so reports are reproducible.
    """
    if n_mux < 1:
        raise ValueError(f"n_mux must be positive, got {n_mux!r}")
    gen = rng.generator()
    psi0 = haar_state(2, gen)
    rows: list[VerifyRow] = []
    for name in _SWEPT_PARAMS:
        for value in np.linspace(0.0, 1.0, SWEEP_POINTS):
            value = float(value)
            params = ChannelParams(
                eta=value if name == "eta" else p.eta,
                eps=value if name == "eps" else p.eps,
                lam=value if name == "lambda" else p.lam,
            )
            mux_form = analytic_mux_fidelity(params)
            rows.append(VerifyRow(name, value, "mux", "analytic", mux_form.f11, 0.0, 0))
            mux_mc = simulate_2x2_mux(psi0, params, n_mux, gen)
            rows.append(
                VerifyRow(name, value, "mux", "density", mux_mc.f11, mux_mc.stderr, n_mux)
            )
            div_form = analytic_div_fidelity(params)
            rows.append(VerifyRow(name, value, "div", "analytic", div_form.f11, 0.0, 0))
            div_run = simulate_2x2_div(psi0, params)
            rows.append(VerifyRow(name, value, "div", "density", div_run.f11, 0.0, 1))
    return rows
