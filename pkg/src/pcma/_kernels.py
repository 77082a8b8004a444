"""Numba kernels for the per-ego hot path.

Both kernels are called once per qualifying vertex, so they carry the
bulk of the stage-1 runtime.  ``cache=True`` persists the compiled code
across processes, which matters when the ego stage runs in a pool.
"""

import numpy as np
from numba import njit


@njit(cache=True)
def ego_local_edges(indptr, indices, center, loc):
    """Edge arrays of the subgraph induced on {center} and its neighbors.

    ``loc`` is an int32 scratch array of length n filled with -1; it is
    restored before returning so it can be reused across calls.  Local
    ids: center = 0, then neighbors in adjacency order.  Each undirected
    edge appears once with u < v in local ids.
    """
    start = indptr[center]
    d = indptr[center + 1] - start
    loc[center] = 0
    for k in range(d):
        loc[indices[start + k]] = k + 1

    cnt = 0
    for k in range(d + 1):
        u = center if k == 0 else indices[start + k - 1]
        lu = loc[u]
        for idx in range(indptr[u], indptr[u + 1]):
            if loc[indices[idx]] > lu:
                cnt += 1

    eu = np.empty(cnt, np.int64)
    ev = np.empty(cnt, np.int64)
    p = 0
    for k in range(d + 1):
        u = center if k == 0 else indices[start + k - 1]
        lu = loc[u]
        for idx in range(indptr[u], indptr[u + 1]):
            lv = loc[indices[idx]]
            if lv > lu:
                eu[p] = lu
                ev[p] = lv
                p += 1

    loc[center] = -1
    for k in range(d):
        loc[indices[start + k]] = -1
    return eu, ev


@njit(cache=True)
def poisson_mixture_em(eu, ev, n, k, theta, max_iter, rel_tol):
    """EM for the overlapping-group edge model on a small graph.

    Each edge (i, j) is modeled as a Poisson count with mean
    sum_z theta[i, z] * theta[j, z]; the objective is

        sum_edges log(sum_z theta_iz theta_jz) - 0.5 * sum_z (sum_i theta_iz)^2

    The E-step attributes each edge to groups proportionally to
    theta_iz * theta_jz; the M-step sets theta_iz to the mass vertex i
    received from group z divided by sqrt of twice the group's total,
    which maximizes the usual Jensen bound exactly, so the objective is
    nondecreasing.

    Returns (trace, mass): the objective value per iteration and the
    (n, k) per-vertex group mass at the final theta.  Row sums of
    ``mass`` equal vertex degrees, so mass / degree is a row-stochastic
    belonging matrix.
    """
    m = eu.shape[0]
    trace = np.empty(max_iter + 1, np.float64)
    mass = np.zeros((n, k), np.float64)
    qsum = np.empty(k, np.float64)
    prev = 0.0
    n_ll = 0
    for it in range(max_iter + 1):
        for i in range(n):
            for z in range(k):
                mass[i, z] = 0.0
        for z in range(k):
            qsum[z] = 0.0
        ll = 0.0
        for e in range(m):
            i = eu[e]
            j = ev[e]
            s = 0.0
            for z in range(k):
                s += theta[i, z] * theta[j, z]
            if s < 1e-300:
                s = 1e-300
            ll += np.log(s)
            for z in range(k):
                qe = theta[i, z] * theta[j, z] / s
                mass[i, z] += qe
                mass[j, z] += qe
                qsum[z] += qe
        pen = 0.0
        for z in range(k):
            col = 0.0
            for i in range(n):
                col += theta[i, z]
            pen += col * col
        ll -= 0.5 * pen
        trace[it] = ll
        n_ll = it + 1
        if it > 0 and ll - prev <= rel_tol * abs(prev):
            break
        prev = ll
        if it == max_iter:
            break
        for z in range(k):
            den = np.sqrt(2.0 * qsum[z])
            if den < 1e-150:
                den = 1e-150
            for i in range(n):
                theta[i, z] = mass[i, z] / den
    return trace[:n_ll], mass
