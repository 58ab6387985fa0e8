"""Hot numerical kernels with a numba fast path and a pure-numpy fallback.

The only genuinely hot loop in the package is the Wigner grid evaluation,
which costs O(n_grid * cutoff^2) generalized-Laguerre recurrences.  The
backend is chosen once at import time from the ``QRX_BACKEND`` environment
variable:

    QRX_BACKEND=numba   require the jit kernel (ImportError if numba missing)
    QRX_BACKEND=numpy   force the vectorized scipy/numpy path
    QRX_BACKEND=auto    (default) numba when importable, else numpy

Both paths evaluate the same displaced-parity expression

    W(q, p) = (1/pi) Re sum_{m<=n} w_mn rho_mn (-1)^m <n|D(2 alpha)|m>,

with alpha = (q + i p)/sqrt(2) and <n|D(beta)|m> written through the
generalized Laguerre polynomial L_m^{(n-m)}(|beta|^2).
"""

from __future__ import annotations

import os

import numpy as np

_REQUESTED = os.environ.get("QRX_BACKEND", "auto").lower()
if _REQUESTED not in ("auto", "numba", "numpy"):
    raise ValueError(f"QRX_BACKEND must be auto|numba|numpy, got {_REQUESTED!r}")

_HAVE_NUMBA = False
if _REQUESTED in ("auto", "numba"):
    try:
        from numba import njit, prange

        _HAVE_NUMBA = True
    except ImportError:
        if _REQUESTED == "numba":
            raise

BACKEND = "numba" if _HAVE_NUMBA else "numpy"


def _wigner_grid_numpy(rho: np.ndarray, q_flat: np.ndarray, p_flat: np.ndarray) -> np.ndarray:
    """Vectorized over the grid, looping over the (m, n) index pairs."""
    from scipy.special import eval_genlaguerre, gammaln

    dim = rho.shape[0]
    beta = np.sqrt(2.0) * (q_flat + 1j * p_flat)  # 2*alpha
    x = np.abs(beta) ** 2
    env = np.exp(-0.5 * x)
    lf = gammaln(np.arange(dim) + 1.0)  # log m!

    total = np.zeros(q_flat.shape, dtype=float)
    # diagonal j = n - m = 0
    for m in range(dim):
        rmm = rho[m, m].real
        if rmm != 0.0:
            total += ((-1.0) ** m) * rmm * eval_genlaguerre(m, 0, x)
    acc = np.zeros(q_flat.shape, dtype=complex)
    for j in range(1, dim):
        betaj = beta**j
        for m in range(dim - j):
            n = m + j
            r_mn = rho[m, n]
            if r_mn == 0.0:
                continue
            pref = np.exp(0.5 * (lf[m] - lf[n]))  # sqrt(m!/n!)
            acc += ((-1.0) ** m) * r_mn * pref * betaj * eval_genlaguerre(m, j, x)
    total += 2.0 * acc.real
    return total * env / np.pi


def _wigner_point_loops(rho, q, p, out):  # pragma: no cover - jitted body
    dim = rho.shape[0]
    npts = q.shape[0]
    # sqrt(m!/n!) table for n >= m
    lf = np.zeros(dim)
    for k in range(1, dim):
        lf[k] = lf[k - 1] + np.log(k)
    for idx in prange(npts):
        br = np.sqrt(2.0) * q[idx]
        bi = np.sqrt(2.0) * p[idx]
        x = br * br + bi * bi
        total = 0.0
        for j in range(dim):
            # Laguerre recurrence in the degree m at fixed order j
            lm2 = 0.0
            lm1 = 1.0  # L_0^{(j)} = 1
            # beta^j
            pr, pi = 1.0, 0.0
            for _ in range(j):
                pr, pi = pr * br - pi * bi, pr * bi + pi * br
            sign = 1.0
            for m in range(dim - j):
                n = m + j
                if m == 1:
                    lm2, lm1 = lm1, (1.0 + j - x)
                elif m > 1:
                    lnew = ((2.0 * m - 1.0 + j - x) * lm1 - (m - 1.0 + j) * lm2) / m
                    lm2, lm1 = lm1, lnew
                rr = rho[m, n].real
                ri = rho[m, n].imag
                if rr != 0.0 or ri != 0.0:
                    pref = sign * np.exp(0.5 * (lf[m] - lf[n])) * lm1
                    re = rr * pr - ri * pi  # Re(rho_mn * beta^j)
                    if j == 0:
                        total += pref * re
                    else:
                        total += 2.0 * pref * re
                sign = -sign
        out[idx] = total * np.exp(-0.5 * x) / np.pi


if _HAVE_NUMBA:
    _wigner_point_loops_jit = njit(parallel=True, cache=True)(_wigner_point_loops)

    def _wigner_grid_numba(rho, q_flat, p_flat):
        out = np.empty(q_flat.shape[0], dtype=float)
        _wigner_point_loops_jit(np.ascontiguousarray(rho, dtype=complex), q_flat, p_flat, out)
        return out


def wigner_grid(rho: np.ndarray, q_flat: np.ndarray, p_flat: np.ndarray) -> np.ndarray:
    """Evaluate W at the flattened grid points; returns a real array."""
    if BACKEND == "numba":
        return _wigner_grid_numba(rho, q_flat, p_flat)
    return _wigner_grid_numpy(rho, q_flat, p_flat)
