"""JIT-compiled inner loops (Gillespie direct method and ODE fluxes)."""
import numpy as np
from numba import njit

REACHED_T_END = 0
EXHAUSTED = 1
EVENT_LIMIT = 2
BAD_PROPENSITY = 3


@njit(nogil=True, cache=True)
def propensities(x, kind, sp1, sp2, par, a):
    """Fill ``a`` in place; return (a0, index of first invalid entry or -1)."""
    a0 = 0.0
    bad = -1
    for r in range(kind.shape[0]):
        i = sp1[r]
        j = sp2[r]
        k = kind[r]
        if k == 0:
            if i < 0:
                v = par[r, 0]
            elif j < 0:
                v = par[r, 0] * x[i]
            elif i == j:
                v = par[r, 0] * x[i] * (x[i] - 1) * 0.5
            else:
                v = par[r, 0] * x[i] * x[j]
        elif k == 1:
            s = float(x[i])
            v = par[r, 0] * s / (par[r, 1] + s)
        else:
            s = float(x[i]) ** par[r, 2]
            v = par[r, 0] * s / (par[r, 1] + s)
        if not (v >= 0.0) and bad < 0:
            bad = r
        a[r] = v
        a0 += v
    return a0, bad


@njit(nogil=True, cache=True)
def choose(a, a0, u):
    target = u * a0
    acc = 0.0
    last = -1
    for r in range(a.shape[0]):
        if a[r] > 0.0:
            acc += a[r]
            last = r
            if acc > target:
                return r
    return last


@njit(nogil=True, cache=True)
def ssa_grid(x0, kind, sp1, sp2, par, change, grid, max_events, rng, out):
    """Direct-method run recording the state at each grid time.

    Returns (status, rows filled, events fired, offending reaction).
    """
    x = x0.copy()
    nr = kind.shape[0]
    ns = x.shape[0]
    ng = grid.shape[0]
    a = np.zeros(nr)
    t = 0.0
    k = 0
    events = 0
    while True:
        a0, bad = propensities(x, kind, sp1, sp2, par, a)
        if bad >= 0:
            return BAD_PROPENSITY, k, events, bad
        if a0 == 0.0:
            while k < ng:
                out[k, :] = x
                k += 1
            return EXHAUSTED, k, events, -1
        t_next = t - np.log(1.0 - rng.random()) / a0
        while k < ng and grid[k] < t_next:
            out[k, :] = x
            k += 1
        if k == ng:
            return REACHED_T_END, k, events, -1
        if events >= max_events:
            return EVENT_LIMIT, k, events, -1
        j = choose(a, a0, rng.random())
        for s in range(ns):
            x[s] += change[j, s]
        t = t_next
        events += 1


@njit(nogil=True, cache=True)
def ssa_events(x0, kind, sp1, sp2, par, change, t_end, max_events, rng):
    """Direct-method run recording every event; returns (status, times, states, bad)."""
    x = x0.copy()
    nr = kind.shape[0]
    ns = x.shape[0]
    cap = 1024
    times = np.empty(cap)
    states = np.empty((cap, ns), np.int64)
    times[0] = 0.0
    states[0, :] = x
    n = 1
    a = np.zeros(nr)
    t = 0.0
    status = REACHED_T_END
    bad = -1
    while True:
        a0, bad = propensities(x, kind, sp1, sp2, par, a)
        if bad >= 0:
            status = BAD_PROPENSITY
            break
        if a0 == 0.0:
            status = EXHAUSTED
            break
        t_next = t - np.log(1.0 - rng.random()) / a0
        if t_next > t_end:
            break
        if n - 1 >= max_events:
            status = EVENT_LIMIT
            break
        j = choose(a, a0, rng.random())
        for s in range(ns):
            x[s] += change[j, s]
        t = t_next
        if n == cap:
            cap *= 2
            nt = np.empty(cap)
            nt[:n] = times[:n]
            nst = np.empty((cap, ns), np.int64)
            nst[:n] = states[:n]
            times = nt
            states = nst
        times[n] = t
        states[n, :] = x
        n += 1
    return status, times[:n].copy(), states[:n].copy(), bad


@njit(cache=True)
def fluxes(x, kind, sp1, sp2, par, f):
    """Deterministic reaction fluxes on real-valued counts."""
    for r in range(kind.shape[0]):
        i = sp1[r]
        j = sp2[r]
        k = kind[r]
        if k == 0:
            if i < 0:
                v = par[r, 0]
            elif j < 0:
                v = par[r, 0] * x[i]
            elif i == j:
                v = par[r, 0] * x[i] * x[i] * 0.5
            else:
                v = par[r, 0] * x[i] * x[j]
        elif k == 1:
            v = par[r, 0] * x[i] / (par[r, 1] + x[i])
        else:
            s = abs(x[i]) ** par[r, 2]
            v = par[r, 0] * s / (par[r, 1] + s)
        f[r] = v
    return f
