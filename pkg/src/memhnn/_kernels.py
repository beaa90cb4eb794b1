"""Compiled inner loops.  All randomness is supplied by the caller (or, for
the SA oracle, seeded per restart) so results are reproducible per seed."""
import numpy as np
from numba import njit


@njit(cache=True)
def _pair_energy(W, v):
    n = v.shape[0]
    e = 0.0
    for i in range(n):
        s = 0.0
        for j in range(n):
            s += W[i, j] * v[j]
        e += s * v[i]
    return -0.25 * e


@njit(cache=True)
def anneal(A, W, v0, orders, unif, offsets, amps, thetas, batch, hysteresis):
    """Run one annealing trajectory.

    A        effective field operator seen by the dynamics (n, n)
    W        true Hopfield weights used for the recorded energy/cut
    orders   node visiting order per sweep (T, n)
    unif     uniforms in [0, 1) per sweep position; noise = amp * (2u - 1)
    offsets  additive field perturbation per sweep position, or shape (0, 0)
    """
    T = orders.shape[0]
    n = v0.shape[0]
    v = v0.copy()
    energies = np.empty(T + 1)
    cuts = np.empty(T + 1)
    offset = -0.25 * W.sum()
    e = _pair_energy(W, v)
    energies[0] = e
    cuts[0] = offset - e
    best = cuts[0]
    best_t = 0
    best_v = v.copy()
    has_off = offsets.shape[0] > 0
    newv = np.empty(batch)
    for t in range(T):
        a = amps[t]
        th = thetas[t]
        p0 = 0
        while p0 < n:
            p1 = min(p0 + batch, n)
            for p in range(p0, p1):
                i = orders[t, p]
                u = 0.0
                for j in range(n):
                    u += A[i, j] * v[j]
                if has_off:
                    u += offsets[t, p]
                x = u + a * (2.0 * unif[t, p] - 1.0)
                if hysteresis:
                    s = v[i]
                    newv[p - p0] = -s if s * x <= -th else s
                else:
                    newv[p - p0] = 1.0 if x >= th else -1.0
            for p in range(p0, p1):
                v[orders[t, p]] = newv[p - p0]
            p0 = p1
        e = _pair_energy(W, v)
        energies[t + 1] = e
        cuts[t + 1] = offset - e
        if cuts[t + 1] > best:
            best = cuts[t + 1]
            best_t = t + 1
            best_v[:] = v
    return energies, cuts, v, best_v, best_t


@njit(cache=True)
def exact_max_cut(adj):
    """Gray-code enumeration of all cuts with node 0 pinned to +1."""
    n = adj.shape[0]
    x = np.ones(n)
    f = np.zeros(n)
    for k in range(n):
        for j in range(n):
            f[k] += adj[k, j]
    cut = 0.0
    best = 0.0
    best_x = x.copy()
    total = np.int64(1) << (n - 1)
    for code in range(1, total):
        bit = 0
        c = code
        while (c & 1) == 0:
            c >>= 1
            bit += 1
        node = bit + 1
        cut += x[node] * f[node]
        x[node] = -x[node]
        d = 2.0 * x[node]
        for j in range(n):
            f[j] += d * adj[j, node]
        if cut > best:
            best = cut
            best_x[:] = x
    return best, best_x, total


@njit(cache=True)
def sa_restarts(adj, steps, t_init, t_final, seeds):
    """Single-flip Metropolis on the cut value, one restart per seed.

    Returns per-restart best cuts and the best state over all restarts.
    """
    n = adj.shape[0]
    R = seeds.shape[0]
    bests = np.empty(R)
    overall = -np.inf
    overall_x = np.ones(n)
    x = np.empty(n)
    f = np.empty(n)
    ratio = t_final / t_init
    for r in range(R):
        np.random.seed(seeds[r])
        for i in range(n):
            x[i] = 1.0 if np.random.random() < 0.5 else -1.0
        cut = 0.0
        for i in range(n):
            s = 0.0
            for j in range(n):
                s += adj[i, j] * x[j]
            f[i] = s
            cut += 0.5 * adj[i, :].sum() - 0.5 * x[i] * s
        cut *= 0.5
        best = cut
        if best > overall:
            overall = best
            overall_x[:] = x
        for step in range(steps):
            if steps > 1:
                temp = t_init * ratio ** (step / (steps - 1))
            else:
                temp = t_init
            k = np.random.randint(0, n)
            gain = x[k] * f[k]
            if gain >= 0.0 or np.random.random() < np.exp(gain / temp):
                cut += gain
                x[k] = -x[k]
                d = 2.0 * x[k]
                for j in range(n):
                    f[j] += d * adj[j, k]
                if cut > best:
                    best = cut
                    if best > overall:
                        overall = best
                        overall_x[:] = x
        bests[r] = best
    return bests, overall_x
