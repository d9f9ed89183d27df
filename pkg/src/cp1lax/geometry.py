"""Metric, 3-form, metric derivative, and real-slice signature by quadrature.

All tensors are evaluated at the basepoint of the moduli space (bi-invariance
makes that sufficient) on the concentrated basis around p1.  Closed forms
used by the tests:

    g_ab      = 2 pi i (p1 - p2) kappa_ab
    Omega_abc = -(2 pi i / 3) kappa_cd f_ab^d (p1 + p2)

``threeform`` reports the second normalization.  The raw S3-antisymmetrized
quadrature (`threeform_s3_sum`) comes out at -3x that value under the moment
convention; it is the scaling that enters the variational equations and the
flatness identities, so the equations-of-motion code uses
``torsion = -3 * Omega_reported`` throughout.
"""
from __future__ import annotations

import itertools
import json
from dataclasses import dataclass

import numpy as np

from .curve import Contour, ModelParams
from .errors import ConfigurationError
from .lie import AlgebraData

__all__ = [
    "GeometryTensors", "metric", "threeform", "threeform_s3_sum",
    "metric_derivative", "gauge_invariance_residual", "signature",
    "geometry_tensors", "tensors_to_json",
]

_PERMS = [(s, p) for p in itertools.permutations((0, 1, 2))
          for s in ([1] if p in [(0, 1, 2), (1, 2, 0), (2, 0, 1)] else [-1])]


class _Workspace:
    """Shared per-(params, N) quadrature state for the basepoint tensors."""

    def __init__(self, params: ModelParams, n_nodes: int):
        self.contour = Contour(params, n_nodes)
        F = self.contour.base_scalar()
        self.F = F
        # on-contour profiles of the two inverse transforms of a basis density
        self.inv1 = self.contour.dbar_profile(1, {0: F})
        self.inv2 = self.contour.dbar_profile(2, {0: F})


def _workspace(params: ModelParams, n_nodes: int) -> _Workspace:
    return _Workspace(params, n_nodes)


def metric(params: ModelParams, algebra: AlgebraData, a: int, b: int, n_nodes: int = 512) -> complex:
    """Metric component g_ab by symmetrized contour quadrature."""
    ws = _workspace(params, n_nodes)
    scalar = 2.0 * ws.contour.pair(ws.inv1, {0: ws.F})
    return complex(scalar * algebra.kappa[a, b])


def threeform_s3_sum(params: ModelParams, algebra: AlgebraData, a: int, b: int, c: int,
                     n_nodes: int = 512) -> complex:
    """Full S3-antisymmetrized quadrature of the 3-form integrand.

    This is the normalization in which the flatness/equations-of-motion
    coefficient identities close exactly (the sigma-model torsion).
    """
    ws = _workspace(params, n_nodes)
    con = ws.contour
    idx = (a, b, c)
    total = 0.0 + 0.0j
    for sign, perm in _PERMS:
        i, j, k = (idx[perm[0]], idx[perm[1]], idx[perm[2]])
        dens = con.profile_mul({0: ws.F}, ws.inv1)   # [A_i, dbar1inv A_j] scalar part
        scalar = con.pair(ws.inv2, dens)             # paired against dbar2inv A_k
        total += sign * scalar * algebra.f_low[i, j, k]
    return complex(total)


def threeform(params: ModelParams, algebra: AlgebraData, a: int, b: int, c: int,
              n_nodes: int = 512) -> complex:
    """3-form component Omega_abc in the reported normalization.

    Matches the closed form -(2 pi i/3) kappa_cd f_ab^d (p1+p2); equals
    -1/3 of the raw antisymmetrized quadrature (see module docstring).
    """
    return complex(-threeform_s3_sum(params, algebra, a, b, c, n_nodes) / 3.0)


def metric_derivative(params: ModelParams, algebra: AlgebraData, a: int, b: int, c: int,
                      n_nodes: int = 512) -> complex:
    """Derivative dg_ab / dlambda^c at the basepoint by nested quadrature.

    Two nested-transform terms symmetrized over (a, b); on this target the
    total antisymmetry of <[.,.],.> makes the symmetrized value vanish, but
    each term is a nontrivial quadrature and is exercised by tests.
    """
    ws = _workspace(params, n_nodes)
    scalar = _metric_derivative_term_scalar(ws)
    return complex(scalar * (algebra.f_low[c, a, b] + algebra.f_low[c, b, a]))


def _metric_derivative_term_scalar(ws: _Workspace) -> complex:
    """Scalar part of -oint omega <dbar1inv [A_c, dbar1inv A_a], A_b>."""
    con = ws.contour
    dens = con.profile_mul({0: ws.F}, ws.inv1)
    nested = con.dbar_profile(1, dens)
    return -con.pair(nested, {0: ws.F})


def gauge_invariance_residual(params: ModelParams, algebra: AlgebraData, phi, b: int,
                              n_nodes: int = 512) -> complex:
    """Metric pairing of a basis form against a coboundary; should vanish.

    ``phi`` maps grid points z to (dim,) coefficients and must be
    holomorphic near the contour annulus.  Its mollified cutoff has
    dbar(phi u) = phi dbar u; the density is sampled through a three-radius
    Simpson average across the annulus, mimicking the mollifier width.
    """
    con = Contour(params, n_nodes)
    eps = params.eps
    delta = 0.05 * eps
    phase = np.exp(1j * con.thetas)
    radii = (eps - delta, eps, eps + delta)
    weights = (1.0 / 6.0, 4.0 / 6.0, 1.0 / 6.0)
    samples = 0
    for r, wgt in zip(radii, weights):
        ring = params.p1 + r * phase
        samples = samples + wgt * np.asarray([phi(z) for z in ring], dtype=np.complex128)
    F = con.base_scalar()
    total = 0.0 + 0.0j
    for a_idx in range(algebra.dim):
        dens_phi = {0: samples[:, a_idx]}
        inv_phi = con.dbar_profile(1, dens_phi)
        term1 = con.pair(con.dbar_profile(1, {0: F}), dens_phi)
        term2 = con.pair(inv_phi, {0: F})
        total += (term1 + term2) * algebra.kappa[b, a_idx]
    return complex(total)


def signature(lambdas, sigma_kappa) -> list:
    """Block signature of the real-slice metric.

    Each entry lambda_i = +1 keeps the pairing signature block, -1 swaps it.
    """
    out = []
    pos, neg = sigma_kappa
    for lam in lambdas:
        if lam == 1:
            out.append((pos, neg))
        elif lam == -1:
            out.append((neg, pos))
        else:
            raise ConfigurationError(f"signature entries must be +1 or -1, got {lam}")
    return out


@dataclass(frozen=True)
class GeometryTensors:
    """Basepoint tensors: metric, real-slice metric, 3-form, metric derivative."""

    g: np.ndarray          # (dim, dim)
    g_real: np.ndarray     # g / (2 pi i)
    omega3: np.ndarray     # (dim, dim, dim), reported normalization
    dg: np.ndarray         # (dim, dim, dim): dg[a, b, c] = dg_ab/dlambda^c

    @property
    def torsion(self) -> np.ndarray:
        """3-form scaling entering the equations of motion (-3 x omega3)."""
        return -3.0 * self.omega3

    def nondegeneracy_ratio(self) -> float:
        sv = np.linalg.svd(self.g_real, compute_uv=False)
        return float(sv[-1] / sv[0])


def geometry_tensors(params: ModelParams, algebra: AlgebraData, n_nodes: int = 512) -> GeometryTensors:
    """Assemble all basepoint tensors with shared quadrature state."""
    ws = _workspace(params, n_nodes)
    con = ws.contour
    dim = algebra.dim

    g_scalar = 2.0 * con.pair(ws.inv1, {0: ws.F})
    g = g_scalar * algebra.kappa

    dens = con.profile_mul({0: ws.F}, ws.inv1)
    omega_term_scalar = con.pair(ws.inv2, dens)
    s3 = np.zeros((dim, dim, dim), dtype=np.complex128)
    for a in range(dim):
        for b in range(dim):
            for c in range(dim):
                idx = (a, b, c)
                tot = 0.0 + 0.0j
                for sign, perm in _PERMS:
                    i, j, k = (idx[perm[0]], idx[perm[1]], idx[perm[2]])
                    tot += sign * algebra.f_low[i, j, k]
                s3[a, b, c] = tot * omega_term_scalar
    omega3 = -s3 / 3.0

    dg_scalar = _metric_derivative_term_scalar(ws)
    fl = algebra.f_low
    dg = dg_scalar * (np.transpose(fl, (1, 2, 0)) + np.transpose(fl, (2, 1, 0)))
    # indices: dg[a, b, c] = scalar * (f_low[c,a,b] + f_low[c,b,a])

    tensors = GeometryTensors(g=g, g_real=g / (2j * np.pi), omega3=omega3, dg=dg)
    if tensors.nondegeneracy_ratio() < 1e-6:
        raise ConfigurationError("metric is numerically degenerate for these parameters")
    return tensors


def _carray(x: np.ndarray):
    """Nested lists with complex entries as [re, im] pairs."""
    if x.ndim == 0:
        return [float(np.real(x)), float(np.imag(x))]
    return [_carray(row) for row in x]


def tensors_to_json(tensors: GeometryTensors) -> str:
    doc = {
        "g": _carray(tensors.g),
        "g_real": _carray(tensors.g_real),
        "omega3": _carray(tensors.omega3),
        "dg": _carray(tensors.dg),
    }
    return json.dumps(doc, sort_keys=True)
