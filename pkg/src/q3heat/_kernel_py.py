"""Pure-numpy batch steady-state kernel (fallback when the extension is absent).

Semantics shared with the compiled kernel in _kernel.pyx: for each grid
point, assemble the population rate generator from the twelve channels,
solve the row-replaced normalized linear system, and reduce the three
terminal heat currents. Status codes: 0 ok, 1 singular null space,
2 ill-conditioned (results still reported), 3 negative populations
beyond tolerance (results withheld).
"""

from __future__ import annotations

import numpy as np

STATUS_OK = 0
STATUS_SINGULAR = 1
STATUS_UNSTABLE = 2
STATUS_NEGATIVE = 3

COND_LIMIT = 1e10
NEGATIVE_TOL = 1e-10
PIVOT_TOL = 1e-13


def solve_batch(lam, ch_bath, ch_freq, ch_a2, ch_pairs, temperature, gamma, ohmic):
    """Solve N steady states.

    lam: (8,) eigenvalues; ch_*: per-channel static data (12 channels,
    pairs as (12, 2, 2) 0-based (upper, lower) indices); temperature,
    gamma, ohmic: (N, 3) per-point bath parameters, bath order L, M, R.

    Returns (populations (N,8), currents (N,3), residual (N,), cond (N,),
    status (N,) int32).
    """
    lam = np.asarray(lam, dtype=np.float64)
    ch_freq = np.asarray(ch_freq, dtype=np.float64)
    ch_a2 = np.asarray(ch_a2, dtype=np.float64)
    ch_bath = np.asarray(ch_bath, dtype=np.intp)
    ch_pairs = np.asarray(ch_pairs, dtype=np.intp)
    temperature = np.atleast_2d(np.asarray(temperature, dtype=np.float64))
    gamma = np.atleast_2d(np.asarray(gamma, dtype=np.float64))
    ohmic = np.atleast_2d(np.asarray(ohmic)).astype(bool)
    n_pts = temperature.shape[0]
    n_ch = ch_freq.shape[0]

    T_c = temperature[:, ch_bath]                      # (N, 12)
    g_c = gamma[:, ch_bath]
    gw = np.where(ohmic[:, ch_bath], g_c * ch_freq, g_c)
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        x = np.where(T_c > 0.0, ch_freq / np.where(T_c > 0.0, T_c, 1.0), np.inf)
        occ = np.where(x > 700.0, 0.0, 1.0 / np.expm1(np.minimum(x, 700.0)))
    rate_up = gw * occ * ch_a2                          # absorption d -> u
    rate_dn = gw * (occ + 1.0) * ch_a2                  # emission  u -> d

    K = np.zeros((n_pts, 8, 8))
    for c in range(n_ch):
        B = rate_up[:, c]
        A = rate_dn[:, c]
        for u, d in ch_pairs[c]:
            K[:, d, d] -= B
            K[:, u, d] += B
            K[:, u, u] -= A
            K[:, d, u] += A

    status = np.zeros(n_pts, dtype=np.int32)
    pops = np.full((n_pts, 8), np.nan)
    currents = np.full((n_pts, 3), np.nan)
    residual = np.full(n_pts, np.nan)
    cond = np.full(n_pts, np.nan)

    maxrate = np.abs(K).max(axis=(1, 2))
    dead = maxrate == 0.0
    status[dead] = STATUS_SINGULAR

    scale = np.where(dead, 1.0, maxrate)
    A_mat = K / scale[:, None, None]
    A_mat[:, 7, :] = 1.0
    svals = np.linalg.svd(A_mat, compute_uv=False)
    singular = svals[:, -1] < PIVOT_TOL * svals[:, 0]
    status[singular & ~dead] = STATUS_SINGULAR
    bad = dead | singular

    A_solve = A_mat.copy()
    A_solve[bad] = np.eye(8)
    rhs = np.zeros((n_pts, 8, 1))
    rhs[:, 7, 0] = 1.0
    p = np.linalg.solve(A_solve, rhs)[..., 0]
    with np.errstate(divide="ignore", invalid="ignore"):
        cond_all = svals[:, 0] / svals[:, -1]
    cond[~bad] = cond_all[~bad]
    unstable = ~bad & (cond_all > COND_LIMIT)
    status[unstable & (status == STATUS_OK)] = STATUS_UNSTABLE

    negative = ~bad & (p.min(axis=1) < -NEGATIVE_TOL)
    status[negative] = STATUS_NEGATIVE
    ok = ~bad & ~negative

    p = np.clip(p, 0.0, None)
    norm = p.sum(axis=1, keepdims=True)
    norm[norm == 0.0] = 1.0
    p = p / norm

    pops[ok] = p[ok]
    residual[ok] = np.abs(np.einsum("nij,nj->ni", K[ok], p[ok])).max(axis=1)

    Q = np.zeros((n_pts, 3))
    for c in range(n_ch):
        b = ch_bath[c]
        flow = np.zeros(n_pts)
        for u, d in ch_pairs[c]:
            flow += rate_up[:, c] * p[:, d] - rate_dn[:, c] * p[:, u]
        Q[:, b] += ch_freq[c] * flow
    currents[ok] = Q[ok]

    return pops, currents, residual, cond, status
