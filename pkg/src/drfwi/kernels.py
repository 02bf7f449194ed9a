"""Numba kernels for the hot time-stepping loops.

These compute exactly the per-cell expressions of System.step_numpy and its
transpose; the numpy path stays the readable reference and the test suite
checks the two agree. All arrays are float64 and C-contiguous; loops write
only the active block (plus the one ghost row), so cells outside it keep
whatever zeros the caller allocated.

Transpose convention: for out[a] = sum_t c_t * y[a + t] restricted to the
active block, the adjoint is z[b] = sum_t c_t * y[b - t] with y supported on
the active block. Symmetric taps give the same gather, antisymmetric ones the
negated gather; the free-surface image ghost adds a fold-back term at the
first interior row.
"""

import numba
import numpy as np

__all__ = ["forward_step", "adjoint_step", "tangent_step"]


@numba.njit(cache=True)
def forward_step(
    up, uc, phi, psi, un, phin, psin, v2t,
    a, b, e, fphi, gphi, fpsi, gpsi,
    iz2, iz1, ix2, ix1, icc,
    ez1, ez2, ex1, ex2,
    ar0, ar1, ac0, ac1, r0, fs,
):
    B = uc.shape[0]
    NX = uc.shape[2]
    gr = r0 - 1
    for s in range(B):
        if fs:
            for j in range(NX):
                uc[s, gr, j] = -uc[s, r0 + 1, j]
                un[s, gr, j] = 0.0
        for i in range(ar0, ar1):
            for j in range(ac0, ac1):
                lap = (
                    icc * uc[s, i, j]
                    + iz1 * (uc[s, i - 1, j] + uc[s, i + 1, j])
                    + iz2 * (uc[s, i - 2, j] + uc[s, i + 2, j])
                    + ix1 * (uc[s, i, j - 1] + uc[s, i, j + 1])
                    + ix2 * (uc[s, i, j - 2] + uc[s, i, j + 2])
                )
                dphix = ex1 * (phi[s, i, j + 1] - phi[s, i, j - 1]) + ex2 * (
                    phi[s, i, j + 2] - phi[s, i, j - 2]
                )
                dpsiz = ez1 * (psi[s, i + 1, j] - psi[s, i - 1, j]) + ez2 * (
                    psi[s, i + 2, j] - psi[s, i - 2, j]
                )
                v2 = lap + dphix + dpsiz
                v2t[s, i - ar0, j - ac0] = v2
                un[s, i, j] = a[i, j] * uc[s, i, j] - b[i, j] * up[s, i, j] + e[i, j] * v2
                dux = ex1 * (uc[s, i, j + 1] - uc[s, i, j - 1]) + ex2 * (
                    uc[s, i, j + 2] - uc[s, i, j - 2]
                )
                duz = ez1 * (uc[s, i + 1, j] - uc[s, i - 1, j]) + ez2 * (
                    uc[s, i + 2, j] - uc[s, i - 2, j]
                )
                phin[s, i, j] = fphi[i, j] * phi[s, i, j] + gphi[i, j] * dux
                psin[s, i, j] = fpsi[i, j] * psi[s, i, j] + gpsi[i, j] * duz


@numba.njit(cache=True)
def adjoint_step(
    wup, wuc, wphi, wpsi, nwup, nwuc, nwphi, nwpsi,
    h, p, q, v2t, gacc,
    idden, a, b, e, fphi, gphi, fpsi, gpsi,
    iz2, iz1, ix2, ix1, icc,
    ez1, ez2, ex1, ex2,
    ar0, ar1, ac0, ac1, r0, fs,
):
    B = wuc.shape[0]
    for s in range(B):
        for i in range(ar0, ar1):
            for j in range(ac0, ac1):
                wc = wuc[s, i, j]
                gacc[s, i, j] += wc * idden[i, j] * v2t[s, i - ar0, j - ac0]
                h[s, i, j] = e[i, j] * wc
                p[s, i, j] = gphi[i, j] * wphi[s, i, j]
                q[s, i, j] = gpsi[i, j] * wpsi[s, i, j]
        for i in range(ar0, ar1):
            for j in range(ac0, ac1):
                lt = (
                    icc * h[s, i, j]
                    + iz1 * (h[s, i - 1, j] + h[s, i + 1, j])
                    + iz2 * (h[s, i - 2, j] + h[s, i + 2, j])
                    + ix1 * (h[s, i, j - 1] + h[s, i, j + 1])
                    + ix2 * (h[s, i, j - 2] + h[s, i, j + 2])
                )
                dxt_p = -(
                    ex1 * (p[s, i, j + 1] - p[s, i, j - 1])
                    + ex2 * (p[s, i, j + 2] - p[s, i, j - 2])
                )
                dzt_q = -(
                    ez1 * (q[s, i + 1, j] - q[s, i - 1, j])
                    + ez2 * (q[s, i + 2, j] - q[s, i - 2, j])
                )
                nwuc[s, i, j] = a[i, j] * wuc[s, i, j] + wup[s, i, j] + lt + dxt_p + dzt_q
                nwup[s, i, j] = -b[i, j] * wuc[s, i, j]
                dxt_h = -(
                    ex1 * (h[s, i, j + 1] - h[s, i, j - 1])
                    + ex2 * (h[s, i, j + 2] - h[s, i, j - 2])
                )
                nwphi[s, i, j] = fphi[i, j] * wphi[s, i, j] + dxt_h
                dzt_h = -(
                    ez1 * (h[s, i + 1, j] - h[s, i - 1, j])
                    + ez2 * (h[s, i + 2, j] - h[s, i - 2, j])
                )
                nwpsi[s, i, j] = fpsi[i, j] * wpsi[s, i, j] + dzt_h
        if fs:
            # The forward lap and d1z at row r0+1 read the image ghost
            # -u[r0+1]; fold the ghost-row transpose value back.
            for j in range(ac0, ac1):
                nwuc[s, r0 + 1, j] += -iz2 * h[s, r0 + 1, j] + ez2 * q[s, r0 + 1, j]
