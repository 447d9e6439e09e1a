"""Numba-compiled hot kernels. Import only when the numba backend is active."""

import numpy as np
from numba import njit

FIVE_SIXTHS = 5.0 / 6.0


@njit(cache=True, nogil=True)
def region_gain_count(etas, epss, lams):
    """Count grid points where the diversity fidelity strictly beats the
    multiplexing fidelity. Arithmetic matches the numpy path expression for
    expression, so both backends count identical point sets."""
    count = 0
    for ie in range(epss.shape[0]):
        eps = epss[ie]
        half_keep = 0.5 * (1.0 - eps)
        div_base = 1.0 - eps * eps
        for il in range(lams.shape[0]):
            lam = lams[il]
            f_div = div_base * (FIVE_SIXTHS - lam / 3.0)
            one_minus_lam = 1.0 - lam
            for ih in range(etas.shape[0]):
                f_mux = half_keep * (1.0 + (1.0 - etas[ih]) * one_minus_lam)
                if f_div > f_mux:
                    count += 1
    return count


@njit(cache=True, nogil=True)
def trajectory_tally(uniforms, p_all_erased, etas, lam):
    """Tally trajectory outcomes from pre-drawn uniforms.

    Column 0 decides whether every target port was erased, columns 1..L are
    the block-swap events of the layers above the clone group, and the last
    column is the depolarizing event on the kept port.  Returns
    (clone survivals, foreign-or-depolarized count); the remainder of the
    samples scored zero.
    """
    n = uniforms.shape[0]
    n_layers = etas.shape[0]
    n_clone = 0
    n_half = 0
    for s in range(n):
        if uniforms[s, 0] < p_all_erased:
            continue
        swapped = False
        for k in range(n_layers):
            if uniforms[s, 1 + k] < etas[k]:
                swapped = True
                break
        if swapped or uniforms[s, 1 + n_layers] < lam:
            n_half += 1
        else:
            n_clone += 1
    return n_clone, n_half
