"""Command-line front end.

Commands::

    qmimo fidelity  --mode {mux,div,general} ...   closed forms (default) or engines
    qmimo simulate  --mode {mux,div,general} ...   sampling/density engine runs
    qmimo region    --points-per-axis N            diversity-gain region fraction
    qmimo dmt       --m M --eta0 E --decay D ...   tradeoff curve CSV
    qmimo verify                                   self-check table (+ sweep CSV)

Flags override values from an optional JSON config file (``--config``); the
config uses the flag names with underscores (``lambda`` for ``--lambda``,
``eta_schedule`` as a list).  Exit codes: 0 success, 1 verify failure,
2 unknown flag/config key, 3 out-of-range value, 4 missing required
parameter, 5 engine capacity exceeded.

All floats in CSV/JSON are serialized as shortest round-trip decimals; the
human-readable fidelity lines use 5 decimal places.  A single master seed
(default 42) expands into per-task streams, so repeated runs with the same
configuration are byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from dataclasses import dataclass
from pathlib import Path

from .channels import ChannelParams
from .experiments import GridSpec, dmt_sweep, iter_region_rows, region_scan
from .linalg import RandomSource, haar_state
from .mimo import (
    EngineCapacityError,
    FidelityReport,
    MimoConfig,
    analytic_div_fidelity,
    analytic_general_fidelity,
    analytic_mux_fidelity,
    simulate_2x2_div,
    simulate_2x2_mux,
    simulate_2x2_mux_exact,
    simulate_general_density,
    trajectory_estimate,
)
from .selfcheck import run_suite

EXIT_VERIFY_FAILED = 1
EXIT_USAGE = 2
EXIT_RANGE = 3
EXIT_MISSING = 4
EXIT_CAPACITY = 5

# master-seed stream layout
_STREAM_INPUT_STATE = 0
_STREAM_MUX_SAMPLES = 1
_STREAM_TRAJECTORY = 2


class CliError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass(frozen=True)
class RunConfig:
    command: str
    mode: str = "mux"
    engine: str = "analytic"
    params: ChannelParams | None = None
    mimo: MimoConfig | None = None
    n_samples: int = 200
    seed: int = 42
    out: str | None = None
    threads: int | None = None
    points_per_axis: int = 200
    m: int | None = None
    eps: float = 0.0
    lam: float = 0.0
    eta0: float = 0.0
    decay: float = 1.0


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmimo",
        description="Fidelity of multiplexed vs cloning-diversity transmission "
        "over crosstalk/erasure/depolarizing channel arrays.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def channel_flags(sp):
        sp.add_argument("--eta", type=float, help="crosstalk probability")
        sp.add_argument("--eps", type=float, help="erasure probability")
        sp.add_argument("--lambda", dest="lam", type=float, help="depolarizing probability")

    def mimo_flags(sp):
        sp.add_argument("--m", type=int, help="number of crosstalk layers (2^m channels)")
        sp.add_argument("--x", type=int, help="diversity exponent (2^x clones per stream)")
        sp.add_argument("--eta0", type=float, help="leading crosstalk probability")
        sp.add_argument("--decay", type=float, help="geometric schedule ratio (eta0/decay^i)")
        sp.add_argument(
            "--eta-schedule",
            dest="eta_schedule",
            help="explicit comma-separated crosstalk schedule (overrides --eta0/--decay)",
        )
        sp.add_argument(
            "--allow-any-schedule",
            dest="allow_any_schedule",
            action="store_true",
            default=None,
            help="accept schedules that are not strictly decreasing",
        )

    def io_flags(sp, samples=True):
        if samples:
            sp.add_argument("--n-samples", dest="n_samples", type=int)
        sp.add_argument("--seed", type=int)
        sp.add_argument("--out", help="output file (CSV or JSON depending on command)")
        sp.add_argument("--config", help="JSON file with the same field names as the flags")
        sp.add_argument("--threads", type=int, help="worker cap for sampling engines")

    for name in ("fidelity", "simulate"):
        sp = sub.add_parser(name, help=f"{name} for one configuration")
        sp.add_argument("--mode", choices=("mux", "div", "general"))
        sp.add_argument("--engine", choices=("analytic", "density", "trajectory"))
        channel_flags(sp)
        mimo_flags(sp)
        io_flags(sp)

    sp = sub.add_parser("region", help="scan the parameter box for diversity gain")
    sp.add_argument("--points-per-axis", dest="points_per_axis", type=int)
    io_flags(sp, samples=False)

    sp = sub.add_parser("dmt", help="diversity-multiplexing tradeoff curve")
    sp.add_argument("--m", type=int)
    sp.add_argument("--eps", type=float)
    sp.add_argument("--lambda", dest="lam", type=float)
    sp.add_argument("--eta0", type=float)
    sp.add_argument("--decay", type=float)
    io_flags(sp, samples=False)

    sp = sub.add_parser("verify", help="run the self-check suite")
    io_flags(sp)
    return parser


def _merge_config(ns: argparse.Namespace) -> dict:
    values = {k: v for k, v in vars(ns).items() if k not in ("command", "config")}
    if ns.config is not None:
        try:
            raw = json.loads(Path(ns.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise CliError(EXIT_RANGE, f"config: {exc}")
        if not isinstance(raw, dict):
            raise CliError(EXIT_RANGE, "config: top-level JSON object required")
        for key, val in raw.items():
            name = "lam" if key == "lambda" else key
            if name not in values:
                raise CliError(EXIT_USAGE, f"unknown config key {key!r} for command {ns.command}")
            if values[name] is None:
                values[name] = val
    return values


def _float_field(name: str, value, default: float, lo: float, hi: float) -> float:
    if value is None:
        return default
    try:
        value = float(value)
    except (TypeError, ValueError):
        raise CliError(EXIT_RANGE, f"{name} must be a number, got {value!r}")
    if not lo <= value <= hi:
        raise CliError(EXIT_RANGE, f"{name} must lie in [{lo}, {hi}], got {value!r}")
    return value


def _int_field(name: str, value, default, lo: int):
    if value is None:
        return default
    if not isinstance(value, int) or isinstance(value, bool):
        raise CliError(EXIT_RANGE, f"{name} must be an integer, got {value!r}")
    if value < lo:
        raise CliError(EXIT_RANGE, f"{name} must be >= {lo}, got {value!r}")
    return value


def _schedule_field(value) -> tuple[float, ...]:
    if isinstance(value, str):
        value = value.split(",")
    if not isinstance(value, (list, tuple)):
        raise CliError(EXIT_RANGE, f"eta_schedule must be a list, got {value!r}")
    try:
        return tuple(float(v) for v in value)
    except (TypeError, ValueError):
        raise CliError(EXIT_RANGE, f"eta_schedule must contain numbers, got {value!r}")


def _validate(command: str, v: dict) -> RunConfig:
    common = dict(
        command=command,
        n_samples=_int_field("n_samples", v.get("n_samples"), 200, 1),
        seed=_int_field("seed", v.get("seed"), 42, 0),
        out=v.get("out"),
        threads=_int_field("threads", v.get("threads"), None, 1),
    )

    if command == "region":
        return RunConfig(
            points_per_axis=_int_field("points_per_axis", v.get("points_per_axis"), 200, 1),
            **common,
        )

    if command == "verify":
        return RunConfig(**common)

    eps = _float_field("eps", v.get("eps"), 0.0, 0.0, 1.0)
    lam = _float_field("lambda", v.get("lam"), 0.0, 0.0, 1.0)

    if command == "dmt":
        if v.get("m") is None:
            raise CliError(EXIT_MISSING, "m is required for dmt")
        return RunConfig(
            m=_int_field("m", v.get("m"), None, 1),
            eps=eps,
            lam=lam,
            eta0=_float_field("eta0", v.get("eta0"), 0.0, 0.0, 1.0),
            decay=_float_field("decay", v.get("decay"), 1.0, 1e-12, float("inf")),
            **common,
        )

    # fidelity / simulate
    mode = v.get("mode") or "mux"
    engine = v.get("engine") or ("analytic" if command == "fidelity" else "density")
    eta = _float_field("eta", v.get("eta"), 0.0, 0.0, 1.0)
    params = ChannelParams(eta=eta, eps=eps, lam=lam)

    mimo = None
    if mode == "general":
        if v.get("m") is None:
            raise CliError(EXIT_MISSING, "m is required for mode general")
        if v.get("x") is None:
            raise CliError(EXIT_MISSING, "x is required for mode general")
        m = _int_field("m", v.get("m"), None, 0)
        x = _int_field("x", v.get("x"), None, 0)
        allow = bool(v.get("allow_any_schedule"))
        if v.get("eta_schedule") is not None:
            schedule = _schedule_field(v.get("eta_schedule"))
        elif v.get("eta0") is not None:
            eta0 = _float_field("eta0", v.get("eta0"), None, 0.0, 1.0)
            decay = _float_field("decay", v.get("decay"), 1.0, 1e-12, float("inf"))
            schedule = tuple(eta0 / decay**i for i in range(m))
        elif m == 0:
            schedule = ()
        else:
            raise CliError(EXIT_MISSING, "eta0 or eta_schedule is required for mode general")
        try:
            mimo = MimoConfig(m, x, schedule, eps, lam, allow_any_schedule=allow)
        except ValueError as exc:
            raise CliError(EXIT_RANGE, str(exc))

    return RunConfig(mode=mode, engine=engine, params=params, mimo=mimo, **common)


def parse_args(argv: list[str]) -> RunConfig:
    ns = _build_parser().parse_args(argv)
    return _validate(ns.command, _merge_config(ns))


# ---------------------------------------------------------------------------
# output helpers


def _fmt(value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


def _write_csv(out: str | None, header: list[str], rows) -> None:
    handle = open(out, "w", newline="") if out else sys.stdout
    try:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])
    finally:
        if out:
            handle.close()


def _print_report(report: FidelityReport, out: str | None) -> None:
    print(f"{report.f11:.5f}")
    if report.f12 is not None:
        print(f"f12 {report.f12:.5f}")
    if report.stderr is not None:
        print(f"stderr {report.stderr:.5f}")
    if out:
        payload = {
            "f11": report.f11,
            "f12": report.f12,
            "engine": report.engine,
            "stderr": report.stderr,
            "x_factor": report.x_factor,
        }
        Path(out).write_text(json.dumps(payload) + "\n")


# ---------------------------------------------------------------------------
# dispatch


def _as_general(cfg: RunConfig) -> MimoConfig:
    if cfg.mimo is not None:
        return cfg.mimo
    x = 0 if cfg.mode == "mux" else 1
    return MimoConfig(1, x, (cfg.params.eta,), cfg.params.eps, cfg.params.lam)


def _run_fidelity(cfg: RunConfig) -> int:
    if cfg.engine == "trajectory":
        report = trajectory_estimate(
            _as_general(cfg),
            cfg.n_samples,
            RandomSource(cfg.seed, stream=_STREAM_TRAJECTORY),
            threads=cfg.threads,
        )
    elif cfg.mode == "general":
        if cfg.engine == "analytic":
            report = analytic_general_fidelity(cfg.mimo)
        else:
            psi0 = haar_state(2, RandomSource(cfg.seed, stream=_STREAM_INPUT_STATE).generator())
            report = simulate_general_density(cfg.mimo, psi0)
    elif cfg.mode == "mux":
        if cfg.engine == "analytic":
            report = analytic_mux_fidelity(cfg.params)
        elif cfg.command == "simulate":
            psi0 = haar_state(2, RandomSource(cfg.seed, stream=_STREAM_INPUT_STATE).generator())
            gen = RandomSource(cfg.seed, stream=_STREAM_MUX_SAMPLES).generator()
            report = simulate_2x2_mux(psi0, cfg.params, cfg.n_samples, gen)
        else:
            psi0 = haar_state(2, RandomSource(cfg.seed, stream=_STREAM_INPUT_STATE).generator())
            report = simulate_2x2_mux_exact(psi0, cfg.params)
    else:
        if cfg.engine == "analytic":
            report = analytic_div_fidelity(cfg.params)
        else:
            psi0 = haar_state(2, RandomSource(cfg.seed, stream=_STREAM_INPUT_STATE).generator())
            report = simulate_2x2_div(psi0, cfg.params)
    _print_report(report, cfg.out)
    return 0


def _run_region(cfg: RunConfig) -> int:
    grid = GridSpec(points_per_axis=cfg.points_per_axis)
    start = time.perf_counter()
    scan = region_scan(grid)
    runtime = time.perf_counter() - start
    if cfg.out:
        _write_csv(
            cfg.out,
            ["eta", "eps", "lambda", "f_mux", "f_div", "gain"],
            iter_region_rows(grid),
        )
    print(
        json.dumps(
            {
                "fraction": scan.fraction,
                "grid_points": scan.grid_points,
                "runtime_seconds": runtime,
            }
        )
    )
    return 0


def _run_dmt(cfg: RunConfig) -> int:
    points = dmt_sweep(cfg.m, eps=cfg.eps, lam=cfg.lam, eta0=cfg.eta0, decay=cfg.decay)
    _write_csv(
        cfg.out,
        ["m", "x", "streams", "diversity_order", "log2_streams", "fidelity"],
        (
            (pt.m, pt.x, pt.streams, pt.diversity_order, pt.log2_streams, pt.fidelity)
            for pt in points
        ),
    )
    return 0


def _run_verify(cfg: RunConfig) -> int:
    suite = run_suite(seed=cfg.seed, n_mux=cfg.n_samples, threads=cfg.threads)
    for check in suite.checks:
        print(f"{'PASS' if check.passed else 'FAIL'} {check.name}: {check.detail}")
    n_pass = sum(c.passed for c in suite.checks)
    print(f"{n_pass}/{len(suite.checks)} checks passed")
    if cfg.out:
        _write_csv(
            cfg.out,
            ["swept_param", "value", "strategy", "engine", "fidelity", "stderr", "n_samples"],
            (
                (r.swept_param, r.value, r.strategy, r.engine, r.fidelity, r.stderr, r.n_samples)
                for r in suite.sweep_rows
            ),
        )
    return 0 if suite.ok else EXIT_VERIFY_FAILED


def run(cfg: RunConfig) -> int:
    if cfg.command in ("fidelity", "simulate"):
        return _run_fidelity(cfg)
    if cfg.command == "region":
        return _run_region(cfg)
    if cfg.command == "dmt":
        return _run_dmt(cfg)
    return _run_verify(cfg)


def main(argv: list[str]) -> int:
    try:
        cfg = parse_args(argv)
        return run(cfg)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    except EngineCapacityError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CAPACITY


def console_main() -> None:
    sys.exit(main(sys.argv[1:]))
