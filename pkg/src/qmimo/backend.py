"""Hot-kernel backend selection: numba JIT kernels or a pure-numpy fallback.

The environment variable ``QMIMO_BACKEND`` picks the path:

* ``auto`` (default) - numba when importable, numpy otherwise;
* ``numba`` - require the JIT kernels, fail loudly if numba is missing;
* ``numpy`` - force the vectorised fallback (numba is never imported).

Both paths consume identical pre-drawn uniform arrays and return exact
integer tallies, so every result is bit-identical across backends.  See
``benchmarks/bench_backends.py`` for a speed comparison.
"""

from __future__ import annotations

import os

import numpy as np

_ENV_VAR = "QMIMO_BACKEND"
_FIVE_SIXTHS = 5.0 / 6.0

_resolved: str | None = None
_region_impl = None
_tally_impl = None


def region_gain_count_numpy(etas: np.ndarray, epss: np.ndarray, lams: np.ndarray) -> int:
    """Pure-numpy region tally; one (eps, lam) plane per eta value."""
    count = 0
    f_div = (1.0 - epss * epss)[:, None] * (_FIVE_SIXTHS - lams / 3.0)[None, :]
    half_keep = (0.5 * (1.0 - epss))[:, None]
    one_minus_lam = 1.0 - lams
    for eta in etas:
        f_mux = half_keep * (1.0 + (1.0 - eta) * one_minus_lam)[None, :]
        count += int(np.count_nonzero(f_div > f_mux))
    return count


def trajectory_tally_numpy(
    uniforms: np.ndarray, p_all_erased: float, etas: np.ndarray, lam: float
) -> tuple[int, int]:
    """Pure-numpy trajectory tally over pre-drawn uniforms."""
    n_layers = etas.shape[0]
    gone = uniforms[:, 0] < p_all_erased
    if n_layers:
        swapped = (uniforms[:, 1 : 1 + n_layers] < etas[None, :]).any(axis=1)
    else:
        swapped = np.zeros(uniforms.shape[0], dtype=bool)
    depol = uniforms[:, 1 + n_layers] < lam
    kept = ~gone
    n_half = int(np.count_nonzero(kept & (swapped | depol)))
    n_clone = int(np.count_nonzero(kept & ~(swapped | depol)))
    return n_clone, n_half


def _resolve() -> None:
    global _resolved, _region_impl, _tally_impl
    if _resolved is not None:
        return
    choice = os.environ.get(_ENV_VAR, "auto").strip().lower()
    if choice not in ("auto", "numba", "numpy"):
        raise ValueError(f"{_ENV_VAR} must be auto, numba or numpy, got {choice!r}")
    if choice == "numpy":
        _resolved = "numpy"
        _region_impl = region_gain_count_numpy
        _tally_impl = trajectory_tally_numpy
        return
    try:
        from . import _kernels_numba
    except ImportError:
        if choice == "numba":
            raise RuntimeError(f"{_ENV_VAR}=numba but numba is not importable")
        _resolved = "numpy"
        _region_impl = region_gain_count_numpy
        _tally_impl = trajectory_tally_numpy
        return
    _resolved = "numba"
    _region_impl = _kernels_numba.region_gain_count
    _tally_impl = _kernels_numba.trajectory_tally


def active_backend() -> str:
    """Name of the backend in use ("numba" or "numpy")."""
    _resolve()
    assert _resolved is not None
    return _resolved


def region_gain_count(etas: np.ndarray, epss: np.ndarray, lams: np.ndarray) -> int:
    _resolve()
    return int(_region_impl(etas, epss, lams))


def trajectory_tally(
    uniforms: np.ndarray, p_all_erased: float, etas: np.ndarray, lam: float
) -> tuple[int, int]:
    _resolve()
    n_clone, n_half = _tally_impl(uniforms, p_all_erased, etas, lam)
    return int(n_clone), int(n_half)
