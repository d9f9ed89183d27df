"""Sequential matrix-chain kernels: numba-jitted with a pure-numpy fallback.

The hot loops of the package are ordered products of small matrices
(monodromies, holonomies, row transports) and first-order affine scans
(variation-of-constants accumulation along a periodic row).  Everything
else vectorizes in plain numpy.

Path selection: the environment variable ``CP1LAX_DISABLE_NUMBA=1`` forces
the fallback; otherwise numba is used when importable.  Both paths execute
the same function bodies.  ``benchmarks/bench_lattice.py`` compares them.
"""
from __future__ import annotations

import os

import numpy as np


def _ordered_product(mats):
    """Product mats[n-1] @ ... @ mats[0] of a stack of (d, d) matrices."""
    n, d = mats.shape[0], mats.shape[1]
    out = np.eye(d, dtype=np.complex128)
    for i in range(n):
        out = np.dot(mats[i], out)
    return out


def _affine_scan(mats, pre, post):
    """Run S <- mats[i] @ (S + pre[i]) + post[i] from S = 0; return (M, S).

    M is the bare ordered product of ``mats``.  This is the one-pass form of
    variation-of-constants for a linear ODE discretized along a row.
    """
    n, d = mats.shape[0], mats.shape[1]
    M = np.eye(d, dtype=np.complex128)
    S = np.zeros(d, dtype=np.complex128)
    for i in range(n):
        S = np.dot(mats[i], S + pre[i]) + post[i]
        M = np.dot(mats[i], M)
    return M, S


def _affine_orbit(mats, pre, post, x0):
    """Full orbit of the affine scan started at x0; out[i] is the state at node i."""
    n, d = mats.shape[0], mats.shape[1]
    out = np.empty((n, d), dtype=np.complex128)
    out[0] = x0
    for i in range(n - 1):
        out[i + 1] = np.dot(mats[i], out[i] + pre[i]) + post[i]
    return out


_DISABLE = os.environ.get("CP1LAX_DISABLE_NUMBA", "0") not in ("0", "", "false", "False")

HAVE_NUMBA = False
if not _DISABLE:
    try:
        from numba import njit

        ordered_product = njit(cache=True)(_ordered_product)
        affine_scan = njit(cache=True)(_affine_scan)
        affine_orbit = njit(cache=True)(_affine_orbit)
        HAVE_NUMBA = True
    except ImportError:  # pragma: no cover - exercised via env flag instead
        pass

if not HAVE_NUMBA:
    ordered_product = _ordered_product
    affine_scan = _affine_scan
    affine_orbit = _affine_orbit
