"""Compiled inner loops for the coupled GLV system.

All kernels operate in place on a C-contiguous ``(N, n)`` float64 state and
take the coupling matrix in CSR form (``indptr``, ``indices``, ``data``).
Summation order is fixed per unit, so results do not depend on how the
caller splits a run into blocks.
"""

import numpy as np
from numba import njit

# fault codes returned in slot 0 of the status array
OK = 0
NONFINITE = 1


# reassociation only; nnan/ninf stay off so faults still surface as NaN/inf
_FAST = {"reassoc", "contract", "arcp", "nsz"}


@njit(cache=True, fastmath=_FAST)
def rhs_into(s, out, rho, gam, A, indptr, indices, data):
    N, n = s.shape
    cpl = np.empty(n)
    for k in range(N):
        g = gam[k]
        for i in range(n):
            cpl[i] = 0.0
        for p in range(indptr[k], indptr[k + 1]):
            l = indices[p]
            w = data[p]
            for i in range(n):
                cpl[i] += w * (s[l, i] - s[k, i])
        for i in range(n):
            x = s[k, i]
            acc = 0.0
            for j in range(n):
                acc += A[i, j] * s[k, j]
            out[k, i] = rho * x - g * x * x - x * acc + cpl[i]


@njit(cache=True)
def _finish(s, new, floor, status, step):
    N, n = s.shape
    for k in range(N):
        for i in range(n):
            v = new[k, i]
            if not np.isfinite(v):
                status[0] = NONFINITE
                status[1] = step
                status[2] = k
                status[3] = i
                return False
            if v < floor:
                v = floor
            s[k, i] = v
    return True


@njit(cache=True)
def _kick(tmp, noisy, sig, eta, step, sq):
    n = tmp.shape[1]
    for m in range(noisy.shape[0]):
        k = noisy[m]
        amp = sig[k] * sq
        for i in range(n):
            tmp[k, i] += amp * abs(eta[step, m, i])


@njit(cache=True)
def rk4_block(s, nsteps, dt, rho, gam, A, indptr, indices, data, floor,
              noisy, sig, eta, status):
    """Advance ``s`` by ``nsteps`` classical RK4 steps, clamping after each.

    Units listed in ``noisy`` receive the same half-normal additive kick as
    in :func:`em_block`, applied after the deterministic update.
    """
    N, n = s.shape
    k1 = np.empty_like(s)
    k2 = np.empty_like(s)
    k3 = np.empty_like(s)
    k4 = np.empty_like(s)
    tmp = np.empty_like(s)
    h2 = 0.5 * dt
    h6 = dt / 6.0
    sq = np.sqrt(dt)
    for step in range(nsteps):
        rhs_into(s, k1, rho, gam, A, indptr, indices, data)
        for k in range(N):
            for i in range(n):
                tmp[k, i] = s[k, i] + h2 * k1[k, i]
        rhs_into(tmp, k2, rho, gam, A, indptr, indices, data)
        for k in range(N):
            for i in range(n):
                tmp[k, i] = s[k, i] + h2 * k2[k, i]
        rhs_into(tmp, k3, rho, gam, A, indptr, indices, data)
        for k in range(N):
            for i in range(n):
                tmp[k, i] = s[k, i] + dt * k3[k, i]
        rhs_into(tmp, k4, rho, gam, A, indptr, indices, data)
        for k in range(N):
            for i in range(n):
                tmp[k, i] = s[k, i] + h6 * (
                    k1[k, i] + 2.0 * k2[k, i] + 2.0 * k3[k, i] + k4[k, i]
                )
        _kick(tmp, noisy, sig, eta, step, sq)
        if not _finish(s, tmp, floor, status, step):
            return


@njit(cache=True)
def em_block(s, nsteps, dt, rho, gam, A, indptr, indices, data, floor,
             noisy, sig, eta, status):
    """Euler-Maruyama with half-normal additive kicks.

    ``noisy`` lists the units with nonzero noise; ``eta[step, m, i]`` is the
    standard normal draw for unit ``noisy[m]``. ``eta`` may hold more rows
    than ``nsteps``; only the first ``nsteps`` are read.
    """
    N, n = s.shape
    f = np.empty_like(s)
    tmp = np.empty_like(s)
    sq = np.sqrt(dt)
    for step in range(nsteps):
        rhs_into(s, f, rho, gam, A, indptr, indices, data)
        for k in range(N):
            for i in range(n):
                tmp[k, i] = s[k, i] + dt * f[k, i]
        _kick(tmp, noisy, sig, eta, step, sq)
        if not _finish(s, tmp, floor, status, step):
            return
