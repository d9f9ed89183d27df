"""Spectral-parameter connection, flatness residual, identity suite, charges.

At a spectral point z off the quadrature contour the connection data reduces
to four scalars times structure constants: the two inverse-transform values
of the basis density (alpha/beta components) and the two nested-transform
values (their lambda-derivatives at the basepoint).  The assembled flatness
coefficient field

    Phi_ab(z) = d beta_b / d lambda^a - d alpha_a / d lambda^b + [alpha_a, beta_b]

is region-independent (the u-profile pieces cancel between the two regions),
which the tests verify numerically; on the lattice the residual is

    R(z) = (beta_a - alpha_a) s2^a + Phi_ab v1^a v2^b

with jets in per-point normal coordinates.  For solved trajectories R(z) is
proportional to the equation-of-motion defect with the z-dependence in the
prefactor only, so it vanishes at the discretization order uniformly in z.

Identity suite: for each coefficient block of the flatness equation, the
pairing ``oint omega < block field, A_c >`` must equal -1/2 times the
matching coefficient of the equations of motion (the second-derivative,
Christoffel, and torsion blocks).  The torsion block uses the
S3-antisymmetrized scaling (``GeometryTensors.torsion``).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .curve import Contour, ModelParams
from .dynamics import LatticeField
from .errors import ConfigurationError, PoleError
from .geometry import GeometryTensors
from .lie import AlgebraData, GroupElement
from .matutil import expm

__all__ = [
    "LaxSample", "HolonomyRecord", "lax_sample", "flatness_residual",
    "verify_main_theorem_identities", "holonomy", "charge_scan",
]


@dataclass(frozen=True)
class LaxSample:
    """Connection data at a spectral point: values and basepoint derivatives."""

    z: complex
    region: str                  # "inside" | "outside"
    alpha_scalar: complex        # alpha_a(z) = alpha_scalar * t_a
    beta_scalar: complex
    dalpha_scalar: complex       # d alpha_y / d lambda^x = dalpha_scalar [t_x, t_y]
    dbeta_scalar: complex
    alpha_vals: np.ndarray       # (dim, dim): row a = coefficients of alpha_a(z)
    beta_vals: np.ndarray
    dalpha: np.ndarray           # (dim, dim, dim): [x, y, :] = d alpha_y/d lambda^x
    dbeta: np.ndarray
    algebra: AlgebraData
    params: ModelParams


@dataclass(frozen=True)
class HolonomyRecord:
    """Holonomy of the t1-component around a periodic row, with trace charges."""

    z: complex
    t2_index: int
    hol: GroupElement
    charges: list
    degenerate_direction: bool


def _admissible_z(params: ModelParams, z: complex, margin: float) -> str:
    for excl, what in ((0.0, "z = 0"), (params.p1, "z = p1"), (params.p2, "z = p2")):
        if abs(z - excl) < 1e-12:
            raise PoleError(f"spectral point excluded: {what}")
    dist = abs(abs(z - params.p1) - params.eps)
    if dist < margin:
        raise ConfigurationError(
            f"spectral point {z} within {margin:.3g} of the quadrature contour")
    return "inside" if abs(z - params.p1) < params.eps else "outside"


def lax_sample(params: ModelParams, algebra: AlgebraData, z: complex,
               n_nodes: int = 512) -> LaxSample:
    """Evaluate connection components and their derivatives at z."""
    region = _admissible_z(params, z, params.eps / 8.0)
    con = Contour(params, n_nodes)
    F = con.base_scalar()
    inv1 = con.dbar_profile(1, {0: F})
    inv2 = con.dbar_profile(2, {0: F})

    a_sc = con.transform_at(1, {0: F}, z)
    b_sc = con.transform_at(2, {0: F}, z)
    da_sc = -con.transform_at(1, con.profile_mul({0: F}, inv1), z)
    db_sc = -con.transform_at(2, con.profile_mul({0: F}, inv2), z)

    dim = algebra.dim
    eye = np.eye(dim, dtype=np.complex128)
    return LaxSample(
        z=complex(z), region=region,
        alpha_scalar=a_sc, beta_scalar=b_sc,
        dalpha_scalar=da_sc, dbeta_scalar=db_sc,
        alpha_vals=a_sc * eye, beta_vals=b_sc * eye,
        dalpha=da_sc * algebra.f, dbeta=db_sc * algebra.f,
        algebra=algebra, params=params,
    )


def flatness_residual(sample: LaxSample, jet: dict) -> np.ndarray:
    """Curvature residual at the sample's spectral point for given jets.

    ``jet`` holds ``v1``, ``v2``, ``s2`` with shape (..., dim); the result
    has the same leading shape.  A pure second-derivative jet returns
    beta_a - alpha_a contracted with it.
    """
    alg = sample.algebra
    v1 = np.asarray(jet["v1"], dtype=np.complex128)
    v2 = np.asarray(jet["v2"], dtype=np.complex128)
    s2 = np.asarray(jet["s2"], dtype=np.complex128)
    lead = (sample.beta_scalar - sample.alpha_scalar) * s2
    phi_scalar = (sample.dbeta_scalar + sample.dalpha_scalar
                  + sample.alpha_scalar * sample.beta_scalar)
    # Phi_ab = dbeta[a,b] - dalpha[b,a] + [alpha_a, beta_b]; every piece is
    # proportional to [t_a, t_b], so the contraction collapses to a bracket.
    br = np.einsum("abc,...a,...b->...c", alg.f, v1, v2)
    return lead + phi_scalar * br


def verify_main_theorem_identities(params: ModelParams, algebra: AlgebraData,
                                   geometry: GeometryTensors, n_nodes: int = 512,
                                   tol: float = 1e-6) -> dict:
    """Check the three coefficient-block pairings against the EOM tensors.

    Returns a report with per-block worst absolute/relative errors and the
    offending indices; ``passed`` is the global verdict at ``tol``.
    """
    con = Contour(params, n_nodes)
    F = con.base_scalar()
    inv1 = con.dbar_profile(1, {0: F})
    inv2 = con.dbar_profile(2, {0: F})
    dim = algebra.dim
    g = geometry.g
    tors = geometry.torsion
    dg = geometry.dg
    scale = float(np.max(np.abs(g)))

    # Block 1: < beta_a - alpha_a , A_c >  vs  -g_ac
    diff_prof = {k: inv2.get(k, 0) - inv1.get(k, 0) for k in set(inv1) | set(inv2)}
    b1_scalar = con.pair(diff_prof, {0: F})
    lhs1 = b1_scalar * algebra.kappa
    rhs1 = -g

    # Phi profile scalar (coefficient of [t_a, t_b] on the contour)
    dbeta_prof = {k: -v for k, v in con.dbar_profile(2, con.profile_mul({0: F}, inv2)).items()}
    dalpha_prof = {k: -v for k, v in con.dbar_profile(1, con.profile_mul({0: F}, inv1)).items()}
    ab_prof = con.profile_mul(inv1, inv2)
    phi_prof: dict = {}
    for prof in (dbeta_prof, dalpha_prof, ab_prof):
        for k, v in prof.items():
            phi_prof[k] = phi_prof.get(k, 0) + v
    phi_pair = con.pair(phi_prof, {0: F})

    f_low = algebra.f_low
    # Block 2 (symmetric): 0.25 * phi_pair * (f_low[a,b,c] + f_low[b,a,c])
    lhs2 = 0.25 * phi_pair * (f_low + np.transpose(f_low, (1, 0, 2)))
    chris = (np.transpose(dg, (2, 1, 0)) + np.transpose(dg, (0, 2, 1))
             - np.transpose(dg, (0, 1, 2)))
    rhs2 = -0.25 * chris  # -(1/2) of the EOM coefficient (1/2) * chris_abc

    # Block 3 (antisymmetric): 0.25 * phi_pair * (f_low[a,b,c] - f_low[b,a,c])
    lhs3 = 0.25 * phi_pair * (f_low - np.transpose(f_low, (1, 0, 2)))
    rhs3 = 0.25 * tors

    report = {"tolerance": tol, "scale": scale, "blocks": {}}
    ok = True
    for name, lhs, rhs in (("second-derivative", lhs1, rhs1),
                           ("symmetric", lhs2, rhs2),
                           ("antisymmetric", lhs3, rhs3)):
        err = np.abs(lhs - rhs)
        worst = np.unravel_index(int(np.argmax(err)), err.shape)
        abs_err = float(err[worst])
        rel = abs_err / max(float(np.abs(rhs[worst])), scale)
        passed = rel <= tol
        ok = ok and passed
        report["blocks"][name] = {
            "max_abs_error": abs_err,
            "max_rel_error": rel,
            "worst_indices": [int(i) for i in worst],
            "passed": bool(passed),
        }
    report["passed"] = bool(ok)
    return report


def _rank(algebra: AlgebraData) -> int:
    return algebra.matrix_size - 1


def holonomy(field: LatticeField, params: ModelParams, t2_index: int, z: complex,
             n_powers: int = 0) -> HolonomyRecord:
    """Ordered product of the t1-transport at spectral point z along a row.

    The t1-component of the induced connection is the alpha value times the
    current, which vanishes for z outside the contour; such records are
    flagged ``degenerate_direction`` and carry the identity holonomy.
    """
    alg = field.algebra
    region = _admissible_z(params, z, params.eps / 8.0)
    k_max = n_powers if n_powers > 0 else _rank(alg)
    m = alg.matrix_size
    if region == "outside":
        hol = np.eye(m, dtype=np.complex128)
        charges = [complex(np.trace(np.linalg.matrix_power(hol, k)))
                   for k in range(1, k_max + 1)]
        return HolonomyRecord(z=complex(z), t2_index=t2_index,
                              hol=GroupElement(hol, alg), charges=charges,
                              degenerate_direction=True)
    Fz = params.pole_coefficient(z)
    j1row = field.j1[:, t2_index, :]
    mid = 0.5 * (j1row + np.roll(j1row, -1, axis=0))
    links = expm(field.h1 * Fz * np.einsum("ia,ajk->ijk", mid, alg.basis))
    hol = _accel.ordered_product(np.ascontiguousarray(links))
    charges = []
    power = np.eye(m, dtype=np.complex128)
    for _ in range(k_max):
        power = power @ hol
        charges.append(complex(np.trace(power)))
    return HolonomyRecord(z=complex(z), t2_index=t2_index,
                          hol=GroupElement(hol, alg), charges=charges,
                          degenerate_direction=False)


def charge_scan(field: LatticeField, params: ModelParams, z_grid, n_powers: int = 0,
                row_stride: int = 1) -> list:
    """Tabulate trace charges over spectral points and t2 rows.

    Returns rows ``(z, k, t2_index, value, drift)`` where drift is the
    per-(z, k) relative deviation from the first sampled row.
    """
    rows = list(range(0, field.n2, row_stride))
    out = []
    for z in z_grid:
        records = [holonomy(field, params, n, z, n_powers) for n in rows]
        k_count = len(records[0].charges)
        for k in range(k_count):
            base = records[0].charges[k]
            ref = max(1.0, abs(base))
            for rec in records:
                val = rec.charges[k]
                out.append((complex(z), k + 1, rec.t2_index, val,
                            abs(val - base) / ref))
    return out
