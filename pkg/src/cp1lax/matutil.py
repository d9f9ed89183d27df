"""Small dense-matrix utilities: batched exponential, logarithm, polar factor.

All routines accept stacks ``(..., d, d)`` and vectorize over leading axes.
The exponential uses scaling-and-squaring with a [13/13] Pade approximant,
accurate to ~1e-15 after scaling the norm below one.
"""
from __future__ import annotations

import numpy as np

from .errors import NumericalError

# Pade-13 coefficients (Higham, "The scaling and squaring method revisited").
_B13 = np.array([
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
    1187353796428800.0, 129060195264000.0, 10559470521600.0,
    670442572800.0, 33522128640.0, 1323241920.0, 40840800.0,
    960960.0, 16380.0, 182.0, 1.0,
])


def expm(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a stack of square complex matrices."""
    a = np.asarray(a, dtype=np.complex128)
    d = a.shape[-1]
    norms = np.max(np.sum(np.abs(a), axis=-1), axis=-1)  # induced-inf norm
    max_norm = float(np.max(norms)) if norms.size else 0.0
    s = max(0, int(np.ceil(np.log2(max_norm))) + 1) if max_norm > 0.5 else 0
    x = a / (2.0 ** s)

    x2 = x @ x
    x4 = x2 @ x2
    x6 = x4 @ x2
    ident = np.broadcast_to(np.eye(d, dtype=np.complex128), x.shape)
    u = x @ (x6 @ (_B13[13] * x6 + _B13[11] * x4 + _B13[9] * x2)
             + _B13[7] * x6 + _B13[5] * x4 + _B13[3] * x2 + _B13[1] * ident)
    v = (x6 @ (_B13[12] * x6 + _B13[10] * x4 + _B13[8] * x2)
         + _B13[6] * x6 + _B13[4] * x4 + _B13[2] * x2 + _B13[0] * ident)
    out = np.linalg.solve(v - u, v + u)
    for _ in range(s):
        out = out @ out
    return out


def logm(a: np.ndarray) -> np.ndarray:
    """Principal matrix logarithm via eigendecomposition.

    Intended for transport factors near the identity (diagonalizable with
    eigenvalues off the branch cut), which is how the lattice code uses it.
    """
    a = np.asarray(a, dtype=np.complex128)
    w, v = np.linalg.eig(a)
    if np.any(np.abs(w) < 1e-300):
        raise NumericalError("matrix logarithm of a singular factor")
    lw = np.log(w)
    return np.einsum("...ij,...j,...jk->...ik", v, lw, np.linalg.inv(v))


def polar_unitary(a: np.ndarray) -> np.ndarray:
    """Closest unitary factor (polar decomposition) of a stack of matrices."""
    u, s, vh = np.linalg.svd(a)
    if np.any(s < 1e-12):
        raise NumericalError("polar re-projection hit a singular factor")
    return u @ vh
