"""Self-verification suite behind the ``verify`` command.

Each check re-derives one of the package's headline numbers through at least
two independent routes (closed form vs density engine vs trajectory sampler
vs literal state construction) and reports pass/fail with a one-line detail.
Checks draw their randomness from per-check derived streams of a single
master seed, so the whole table is reproducible.
"""

from __future__ import annotations

import numpy as np
from dataclasses import dataclass

from . import backend
from .channels import ChannelParams, crosstalk_dilation, crosstalk_mixture
from .cloning import clone_1to2, clone_1toM, clone_fidelity_law
from .experiments import GridSpec, VerifyRow, dmt_sweep, mc_verify, region_scan
from .linalg import (
    DensityMatrix,
    RandomSource,
    fidelity_pure,
    haar_state,
    orthogonal_complement,
)
from .mimo import (
    MimoConfig,
    analytic_div_fidelity,
    analytic_general_fidelity,
    analytic_mux_fidelity,
    simulate_2x2_div,
    simulate_2x2_mux_exact,
    simulate_general_density,
    trajectory_estimate,
)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class SuiteResult:
    checks: list[CheckResult]
    sweep_rows: list[VerifyRow]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)


def _random_params(gen: np.random.Generator) -> ChannelParams:
    eta, eps, lam = gen.random(3)
    return ChannelParams(eta=float(eta), eps=float(eps), lam=float(lam))


def _check_region(seed: int) -> CheckResult:
    scan = region_scan(GridSpec(points_per_axis=200))
    ok = 0.94 <= scan.fraction <= 0.96
    return CheckResult(
        "region_fraction_window",
        ok,
        f"fraction={scan.fraction!r} over {scan.grid_points} points, want [0.94, 0.96]",
    )


def _check_mux_closed_form(seed: int) -> CheckResult:
    gen = RandomSource(seed, stream=10).generator()
    worst = 0.0
    for _ in range(25):
        p = _random_params(gen)
        psi0 = haar_state(2, gen)
        got = simulate_2x2_mux_exact(psi0, p).f11
        worst = max(worst, abs(got - analytic_mux_fidelity(p).f11))
    return CheckResult("mux_closed_form_2x2", worst <= 1e-10, f"max |density-analytic| = {worst:.3e}")


def _check_div_closed_form(seed: int) -> CheckResult:
    gen = RandomSource(seed, stream=11).generator()
    worst = 0.0
    for _ in range(25):
        p = _random_params(gen)
        psi0 = haar_state(2, gen)
        got = simulate_2x2_div(psi0, p).f11
        worst = max(worst, abs(got - analytic_div_fidelity(p).f11))
    return CheckResult("div_closed_form_2x2", worst <= 1e-10, f"max |density-analytic| = {worst:.3e}")


def _check_reductions(seed: int) -> CheckResult:
    gen = RandomSource(seed, stream=12).generator()
    worst = 0.0
    for _ in range(30):
        p = _random_params(gen)
        mux = analytic_general_fidelity(MimoConfig(1, 0, (p.eta,), p.eps, p.lam)).f11
        div = analytic_general_fidelity(MimoConfig(1, 1, (p.eta,), p.eps, p.lam)).f11
        worst = max(
            worst,
            abs(mux - analytic_mux_fidelity(p).f11),
            abs(div - analytic_div_fidelity(p).f11),
        )
    return CheckResult("general_formula_reductions", worst <= 1e-14, f"max gap = {worst:.3e}")


_TRIANGLE_CONFIGS = (
    MimoConfig(1, 0, (0.3,), 0.1, 0.2),
    MimoConfig(1, 1, (0.3,), 0.1, 0.2),
    MimoConfig(2, 0, (0.4, 0.3), 0.15, 0.1),
    MimoConfig(2, 1, (0.4, 0.3), 0.15, 0.1),
    MimoConfig(2, 2, (0.4, 0.3), 0.15, 0.1),
    MimoConfig(3, 1, (0.4, 0.33, 0.28), 0.1, 0.1),
)


def _check_density_triangle(seed: int) -> CheckResult:
    gen = RandomSource(seed, stream=13).generator()
    worst = 0.0
    for cfg in _TRIANGLE_CONFIGS:
        psi0 = haar_state(2, gen)
        got = simulate_general_density(cfg, psi0).f11
        worst = max(worst, abs(got - analytic_general_fidelity(cfg).f11))
    return CheckResult(
        "engine_triangle_density", worst <= 1e-10, f"max |density-analytic| = {worst:.3e}"
    )


def _check_trajectory_triangle(seed: int, threads: int | None) -> CheckResult:
    cfg = MimoConfig.geometric(7, 3, eps=0.1, lam=0.1, eta0=0.4, decay=1.2)
    est = trajectory_estimate(cfg, 100_000, RandomSource(seed, stream=14), threads=threads)
    want = analytic_general_fidelity(cfg).f11
    gap = abs(est.f11 - want)
    bound = 3.0 * est.stderr + 1e-12
    return CheckResult(
        "engine_triangle_trajectory",
        gap <= bound,
        f"|trajectory-analytic| = {gap:.3e}, 3*stderr = {3.0 * est.stderr:.3e}",
    )


def _check_dmt_shape(seed: int) -> CheckResult:
    ok = True
    for m in range(1, 8):
        fids = [pt.fidelity for pt in dmt_sweep(m, eps=0.1, lam=0.1, eta0=0.4, decay=1.2)]
        ok &= all(b >= a for a, b in zip(fids, fids[1:]))
        clean = [pt.fidelity for pt in dmt_sweep(m, eps=0.0, lam=0.0, eta0=0.0, decay=1.2)]
        ok &= all(b < a for a, b in zip(clean, clean[1:]))
        ok &= all(
            abs(f - clone_fidelity_law(1 << x)) <= 1e-15 for x, f in enumerate(clean)
        )
    return CheckResult(
        "dmt_curve_shape", ok, "noisy curves non-decreasing, noiseless strictly decreasing"
    )


def _check_cloning_laws(seed: int) -> CheckResult:
    gen = RandomSource(seed, stream=15).generator()
    worst = 0.0
    for n_clones in (1, 2, 3, 4):
        for _ in range(5):
            psi = haar_state(2, gen)
            batch = clone_1toM(psi, n_clones)
            worst = max(
                worst,
                abs(fidelity_pure(batch.marginal(0), psi) - clone_fidelity_law(n_clones)),
            )
    psi = haar_state(2, gen)
    worst = max(
        worst,
        abs(fidelity_pure(clone_1toM(psi, 8).marginal(5), psi) - clone_fidelity_law(8)),
    )
    law_ok = worst <= 1e-10

    psi = haar_state(2, gen)
    perp = orthogonal_complement(psi)
    pair = np.kron(psi.amplitudes, psi.amplitudes)
    cross = np.kron(psi.amplitudes, perp.amplitudes) + np.kron(perp.amplitudes, psi.amplitudes)
    explicit = (2.0 / 3.0) * np.outer(pair, pair.conj()) + (1.0 / 6.0) * np.outer(
        cross, cross.conj()
    )
    state_gap = float(np.abs(clone_1to2(psi).joint.entries - explicit).max())
    return CheckResult(
        "cloning_laws",
        law_ok and state_gap <= 1e-12,
        f"max law gap = {worst:.3e}, explicit-state gap = {state_gap:.3e}",
    )


def _check_dilation(seed: int) -> CheckResult:
    gen = RandomSource(seed, stream=16).generator()
    worst = 0.0
    for _ in range(20):
        g = gen.standard_normal((4, 4)) + 1j * gen.standard_normal((4, 4))
        rho = DensityMatrix((g @ g.conj().T) / np.trace(g @ g.conj().T).real)
        for eta in (0.0, 0.25, 0.5, 0.75, 1.0):
            gap = np.abs(
                crosstalk_dilation(rho, eta).entries
                - crosstalk_mixture(rho, eta, (0,), (1,)).entries
            ).max()
            worst = max(worst, float(gap))
    return CheckResult("dilation_equivalence", worst <= 1e-12, f"max entry gap = {worst:.3e}")


def _check_eta_independence(seed: int) -> CheckResult:
    gen = RandomSource(seed, stream=17).generator()
    psi0 = haar_state(2, gen)
    etas = (0.0, 0.25, 0.5, 0.75, 1.0)
    two = [simulate_2x2_div(psi0, ChannelParams(eta, 0.2, 0.1)).f11 for eta in etas]
    four = [
        simulate_general_density(
            MimoConfig(2, 1, (eta0, 0.2), 0.2, 0.1, allow_any_schedule=True), psi0
        ).f11
        for eta0 in etas
    ]
    spread2 = max(two) - min(two)
    spread4 = max(four) - min(four)
    return CheckResult(
        "crosstalk_independence",
        spread2 <= 1e-12 and spread4 <= 1e-12,
        f"2x2 spread = {spread2:.3e}, m=2 spread = {spread4:.3e}",
    )


def _check_backend_parity(seed: int) -> CheckResult:
    try:
        from . import _kernels_numba as kernels
    except ImportError:
        return CheckResult(
            "backend_parity", True, "numba unavailable; numpy path is the only implementation"
        )
    grid = GridSpec(points_per_axis=40)
    etas, epss, lams = grid.axes()
    count_nb = int(kernels.region_gain_count(etas, epss, lams))
    count_np = int(backend.region_gain_count_numpy(etas, epss, lams))
    gen = RandomSource(seed, stream=18).generator()
    uniforms = gen.random((10_000, 6))
    sched = np.asarray([0.4 / 1.2**i for i in range(4)])
    tally_nb = kernels.trajectory_tally(uniforms, 0.01, sched, 0.1)
    tally_np = backend.trajectory_tally_numpy(uniforms, 0.01, sched, 0.1)
    ok = count_nb == count_np and tuple(map(int, tally_nb)) == tuple(map(int, tally_np))
    return CheckResult(
        "backend_parity",
        ok,
        f"region counts {count_nb}/{count_np}, tallies {tuple(map(int, tally_nb))}/"
        f"{tuple(map(int, tally_np))} (numba/numpy)",
    )


def _check_mc_sweeps(rows: list[VerifyRow]) -> CheckResult:
    worst_sigma = 0.0
    worst_det = 0.0
    for base in range(0, len(rows), 4):
        mux_an, mux_mc, div_an, div_de = rows[base : base + 4]
        gap = abs(mux_mc.fidelity - mux_an.fidelity)
        bound = 3.0 * mux_mc.stderr + 1e-12
        worst_sigma = max(worst_sigma, gap - bound)
        worst_det = max(worst_det, abs(div_de.fidelity - div_an.fidelity))
        if div_de.stderr != 0.0:
            worst_det = max(worst_det, 1.0)
    ok = worst_sigma <= 0.0 and worst_det <= 1e-10
    return CheckResult(
        "mc_sweep_3sigma",
        ok,
        f"{len(rows)} rows; worst sigma excess = {worst_sigma:.3e}, "
        f"worst cloning gap = {worst_det:.3e}",
    )


def _check_repeatability(seed: int, rows: list[VerifyRow]) -> CheckResult:
    again = mc_verify(ChannelParams(0.2, 0.2, 0.2), rows[1].n_samples, RandomSource(seed, stream=19))
    ok = again == rows
    cfg = MimoConfig.geometric(5, 2, eps=0.1, lam=0.1, eta0=0.4, decay=1.2)
    first = trajectory_estimate(cfg, 30_000, RandomSource(seed, stream=20))
    second = trajectory_estimate(cfg, 30_000, RandomSource(seed, stream=20), threads=1)
    ok = ok and first == second
    return CheckResult(
        "seeded_repeatability",
        ok,
        "sweep rows and trajectory estimates identical across reruns",
    )


def run_suite(seed: int = 42, n_mux: int = 200, threads: int | None = None) -> SuiteResult:
    """Run every check; returns the table plus the sweep rows (for CSV dumps)."""
    rows = mc_verify(ChannelParams(0.2, 0.2, 0.2), n_mux, RandomSource(seed, stream=19))
    checks = [
        _check_region(seed),
        _check_mux_closed_form(seed),
        _check_div_closed_form(seed),
        _check_reductions(seed),
        _check_density_triangle(seed),
        _check_trajectory_triangle(seed, threads),
        _check_dmt_shape(seed),
        _check_cloning_laws(seed),
        _check_dilation(seed),
        _check_eta_independence(seed),
        _check_backend_parity(seed),
        _check_mc_sweeps(rows),
        _check_repeatability(seed, rows),
    ]
    return SuiteResult(checks=checks, sweep_rows=rows)
