"""Compiled inner loop of the greedy model fit."""

import numpy as np
from numba import njit

# Scores within this relative distance of the best one count as tied. Sums
# taken in different orders can split an exact tie by an ulp or two.
TIE_RTOL = 1e-12


@njit(cache=True, nogil=True)
def greedy_fit(cx, cyT, w, vals, denominator, score_scale, max_iterations, floor):
    """Run the selection/update loop for one area.

    ``cx`` is ``(M, P)``, ``cyT`` is ``(P, N)``. ``score_scale`` holds
    ``spectral_weight / denominator`` and is zero for unavailable
    frequencies, so ``num**2 * score_scale`` is the weighted energy gain.

    Returns coefficients, final residual, energy history and the
    ``(u, v, c)`` selection sequence, all trimmed to the iterations run.
    """
    M, P = cx.shape
    N = cyT.shape[1]
    residual = vals.copy()
    coefficients = np.zeros((M, N))
    history = np.empty(max_iterations + 1)
    sel_u = np.empty(max_iterations, np.int64)
    sel_v = np.empty(max_iterations, np.int64)
    sel_c = np.empty(max_iterations)
    cxw = np.empty((M, P))
    for k in range(M):
        for p in range(P):
            cxw[k, p] = cx[k, p] * w[p]
    tmp = np.empty((M, P))

    energy = 0.0
    for p in range(P):
        energy += w[p] * residual[p] * residual[p]
    history[0] = energy

    it = 0
    while it < max_iterations and energy > floor:
        for k in range(M):
            for p in range(P):
                tmp[k, p] = cxw[k, p] * residual[p]
        num = np.dot(tmp, cyT)
        score = num * num * score_scale
        best = score.max()
        if not best > 0.0:
            break
        # first index in C order within the tie band: smallest (k, l)
        flat = np.argmax(score >= best * (1.0 - TIE_RTOL))
        bu = flat // N
        bv = flat % N
        c = num[bu, bv] / denominator[bu, bv]
        coefficients[bu, bv] += c
        energy = 0.0
        for p in range(P):
            residual[p] -= c * (cx[bu, p] * cyT[p, bv])
            energy += w[p] * residual[p] * residual[p]
        sel_u[it] = bu
        sel_v[it] = bv
        sel_c[it] = c
        it += 1
        history[it] = energy
    return coefficients, residual, history[: it + 1], sel_u[:it], sel_v[:it], sel_c[:it]
