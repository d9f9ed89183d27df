"""Lattice fields on the periodic-in-t1 cylinder and the group-level dynamics.

Continuum system (right-logarithmic currents j_alpha = (d_alpha sigma) sigma^-1,
null coordinates t1, t2):

    equation of motion   d1 j2 + d2 j1 = Gamma [j1, j2],   Gamma = gamma / rho
    Maurer-Cartan        d1 j2 - d2 j1 = [j1, j2]

which split into the transport pair

    d2 j1 = a [j1, j2],     a = (Gamma - 1) / 2,
    d1 j2 = b [j1, j2],     b = (Gamma + 1) / 2.

The second line is a constraint along each periodic row: admissible initial
j2 rows are conjugation transports of a seed commuting with the row
monodromy of ``exp(b h1 ad j1)``.  The march integrates j1 pointwise along
the null lines t1 = const (no CFL restriction) with an explicit midpoint
rule, and closes the system by solving the linear periodic row problem

    d1 Phi = b [j1, Phi] + a b [[j1, j2], j2],      Phi := d2 j2,

per stage (variation of constants with ordered exponentials; the
monodromy's near-unit directions are the genuinely free modes of the
characteristic initial-value problem and are pinned to zero).  Group rows
are carried along by the t2-transport of the midpoint current with polar
re-projection on the compact slice; they are diagnostic, the currents are
the dynamical state.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _accel
from .curve import ModelParams
from .errors import ConfigurationError, ModelInconsistencyError, NumericalError
from .geometry import GeometryTensors
from .lie import AlgebraData, ad_matrix
from .matutil import expm, logm, polar_unitary

__all__ = [
    "EomCoefficients", "LatticeField", "InitialData",
    "derive_eom_coefficients", "coordinate_eom_residual",
    "initial_constant", "initial_random_fourier", "initial_from_arrays",
    "step", "solve", "eom_residual", "mc_residual", "current_consistency",
    "energy_rows", "lattice_jets", "left_translate",
]

_BLOWUP_BOUND = 1.0e3


@dataclass(frozen=True)
class EomCoefficients:
    """Coefficients of the group-level residual rho (d1j2 + d2j1) - gamma [j1, j2]."""

    rho: complex
    gamma: complex

    @property
    def ratio(self) -> complex:
        return self.gamma / self.rho


def coordinate_eom_residual(params: ModelParams, algebra: AlgebraData,
                            geometry: GeometryTensors, jet: dict) -> np.ndarray:
    """Coordinate-form residual vector E_c for a second-order jet.

    ``jet`` holds ``v1``, ``v2`` (first t1/t2 derivatives) and ``s2`` (the
    mixed second derivative), all (dim,) coefficient vectors in normal
    coordinates at the basepoint.  Linear in s2.
    """
    v1 = np.asarray(jet["v1"], dtype=np.complex128)
    v2 = np.asarray(jet["v2"], dtype=np.complex128)
    s2 = np.asarray(jet["s2"], dtype=np.complex128)
    g, dg = geometry.g, geometry.dg
    tors = geometry.torsion
    term2 = 2.0 * np.einsum("ac,a->c", g, s2)
    chris = (np.transpose(dg, (2, 1, 0)) + np.transpose(dg, (0, 2, 1))
             - np.transpose(dg, (0, 1, 2)))
    # chris[a, b, c] = dg[c,b,a] + dg[a,c,b] - dg[a,b,c]
    sym = np.einsum("abc,a,b->c", chris, v1, v2) + np.einsum("abc,a,b->c", chris, v2, v1)
    alt = np.einsum("abc,a,b->c", tors, v1, v2) - np.einsum("abc,a,b->c", tors, v2, v1)
    return term2 + 0.5 * sym - 0.5 * alt


def derive_eom_coefficients(params: ModelParams, algebra: AlgebraData,
                            geometry: GeometryTensors, seed: int = 11,
                            tol: float = 1e-6) -> EomCoefficients:
    """Read (rho, gamma) off the coordinate residual and cross-validate.

    The group-level covector form is
    ``E_c = rho kappa_ca (d1j2 + d2j1)^a - gamma kappa_ca [j1, j2]^a``;
    rho comes from a pure second-derivative jet, gamma from a pure
    first-derivative jet, and the fit is then checked on random jets.  A
    relative defect above ``tol`` signals an inconsistent convention and
    raises.
    """
    rng = np.random.default_rng(np.random.Philox(seed))
    dim = algebra.dim
    kappa = algebra.kappa

    x = rng.standard_normal(dim)
    e = coordinate_eom_residual(params, algebra, geometry,
                                {"v1": np.zeros(dim), "v2": np.zeros(dim), "s2": x})
    basis_vec = 2.0 * kappa @ x
    rho = complex((basis_vec.conj() @ e) / (basis_vec.conj() @ basis_vec))

    v1 = rng.standard_normal(dim)
    v2 = rng.standard_normal(dim)
    br = np.einsum("abc,a,b->c", algebra.f, v1, v2)
    e = coordinate_eom_residual(params, algebra, geometry,
                                {"v1": v1, "v2": v2, "s2": np.zeros(dim)})
    bvec = -kappa @ br
    denom = complex(bvec.conj() @ bvec)
    gamma = complex((bvec.conj() @ e) / denom) if abs(denom) > 1e-14 else 0.0 + 0.0j

    coeffs = EomCoefficients(rho=rho, gamma=gamma)
    scale = max(abs(rho), abs(gamma), 1e-14)
    for _ in range(4):
        jet = {"v1": rng.standard_normal(dim), "v2": rng.standard_normal(dim),
               "s2": rng.standard_normal(dim)}
        e_coord = coordinate_eom_residual(params, algebra, geometry, jet)
        comb = (2.0 * rho * np.einsum("ca,a->c", kappa, jet["s2"])
                - gamma * np.einsum("ca,a->c",
                                    kappa, np.einsum("abc,a,b->c", algebra.f, jet["v1"], jet["v2"])))
        if np.max(np.abs(e_coord - comb)) > tol * scale * max(1.0, np.max(np.abs(e_coord))):
            raise ModelInconsistencyError(
                "coordinate and group-level residuals disagree beyond tolerance; "
                "current/chirality convention is inconsistent")
    return coeffs


# ---------------------------------------------------------------------------
# lattice state
# ---------------------------------------------------------------------------

@dataclass
class LatticeField:
    """Trajectory grid: currents and reconstructed group elements.

    Index order [i1, i2]: i1 runs over the periodic t1 circle (n1 sites,
    spacing h1), i2 over t2 rows.  ``sigma[i1, i2]`` is the reconstructed
    group matrix; currents are site-sampled coefficients.
    """

    n1: int
    n2: int
    h1: float
    h2: float
    j1: np.ndarray        # (n1, n2, dim)
    j2: np.ndarray        # (n1, n2, dim)
    sigma: np.ndarray     # (n1, n2, m, m)
    algebra: AlgebraData

    def row_j(self, n: int):
        return self.j1[:, n, :].copy(), self.j2[:, n, :].copy()


@dataclass(frozen=True)
class InitialData:
    """Boundary rows at t2 = 0: currents plus the starting group row."""

    j1_row: np.ndarray    # (n1, dim)
    j2_row: np.ndarray    # (n1, dim)
    sigma_row: np.ndarray  # (n1, m, m)


def _group_exp_rows(alg: AlgebraData, coeff_rows: np.ndarray) -> np.ndarray:
    mats = np.einsum("...a,aij->...ij", coeff_rows, alg.basis)
    return expm(mats)


def _row_monodromy_factors(alg: AlgebraData, j1row: np.ndarray, h1: float, b: complex) -> np.ndarray:
    mid = 0.5 * (j1row + np.roll(j1row, -1, axis=0))
    return expm(h1 * b * ad_matrix(alg, mid))


def _solve_near_singular(A: np.ndarray, rhs: np.ndarray, rel_cut: float = 1e-8) -> np.ndarray:
    """Minimal-norm solve with near-null directions dropped (pinned modes)."""
    U, sv, Vh = np.linalg.svd(A)
    y = U.conj().T @ rhs
    keep = sv > rel_cut * sv[0]
    inv = np.where(keep, 1.0 / np.where(keep, sv, 1.0), 0.0)
    return Vh.conj().T @ (inv * y)


def _phi_row(alg: AlgebraData, j1row: np.ndarray, j2row: np.ndarray,
             h1: float, a: complex, b: complex) -> np.ndarray:
    """Solve the periodic row problem for Phi = d2 j2 (see module docstring)."""
    f = alg.f
    br12 = np.einsum("abc,ia,ib->ic", f, j1row, j2row)
    rhs = a * b * np.einsum("abc,ia,ib->ic", f, br12, j2row)
    E = np.ascontiguousarray(_row_monodromy_factors(alg, j1row, h1, b))
    pre = np.ascontiguousarray(0.5 * h1 * rhs)
    post = np.ascontiguousarray(0.5 * h1 * np.roll(rhs, -1, axis=0))
    M, S = _accel.affine_scan(E, pre, post)
    phi0 = _solve_near_singular(np.eye(alg.dim) - M, S)
    return _accel.affine_orbit(E, pre, post, np.ascontiguousarray(phi0))


def _rhs(alg: AlgebraData, j1row, j2row, h1, a, b):
    r1 = a * np.einsum("abc,ia,ib->ic", alg.f, j1row, j2row)
    r2 = _phi_row(alg, j1row, j2row, h1, a, b)
    return r1, r2


def step(field: LatticeField, coeffs: EomCoefficients) -> LatticeField:
    """Advance the trajectory by one t2 row (explicit midpoint, order 2)."""
    alg = field.algebra
    gam = coeffs.ratio
    a = (gam - 1.0) / 2.0
    b = (gam + 1.0) / 2.0
    h1, h2 = field.h1, field.h2
    j1, j2 = field.row_j(field.n2 - 1)

    k1a, k2a = _rhs(alg, j1, j2, h1, a, b)
    j1m = j1 + 0.5 * h2 * k1a
    j2m = j2 + 0.5 * h2 * k2a
    k1b, k2b = _rhs(alg, j1m, j2m, h1, a, b)
    j1n = j1 + h2 * k1b
    j2n = j2 + h2 * k2b

    if np.max(np.abs(j1n)) > _BLOWUP_BOUND or np.max(np.abs(j2n)) > _BLOWUP_BOUND:
        raise NumericalError("current norm exceeded the blow-up bound")

    # transport the whole group row along t2 (midpoint current), preserving
    # periodicity exactly; re-project onto the group on the compact slice
    move = expm(h2 * np.einsum("ia,ajk->ijk", j2m, alg.basis))
    sigma_row = move @ field.sigma[:, -1]
    if _is_unitary_slice(gam):
        sigma_row = polar_unitary(sigma_row)

    out = LatticeField(
        n1=field.n1, n2=field.n2 + 1, h1=h1, h2=h2,
        j1=np.concatenate([field.j1, j1n[:, None, :]], axis=1),
        j2=np.concatenate([field.j2, j2n[:, None, :]], axis=1),
        sigma=np.concatenate([field.sigma, sigma_row[:, None]], axis=1),
        algebra=alg,
    )
    return out


def _is_unitary_slice(gam: complex) -> bool:
    return abs(np.imag(gam)) < 1e-12


def solve(initial: InitialData, steps: int, coeffs: EomCoefficients,
          algebra: AlgebraData, h1: float, h2: float) -> LatticeField:
    """March ``steps`` rows from the boundary data; returns the full grid."""
    n1 = initial.j1_row.shape[0]
    if n1 < 8 or steps < 7:
        raise ConfigurationError("lattice sizes below 8x8 are rejected")
    field = LatticeField(
        n1=n1, n2=1, h1=h1, h2=h2,
        j1=np.asarray(initial.j1_row, dtype=np.complex128)[:, None, :],
        j2=np.asarray(initial.j2_row, dtype=np.complex128)[:, None, :],
        sigma=np.asarray(initial.sigma_row, dtype=np.complex128)[:, None],
        algebra=algebra,
    )
    for _ in range(steps):
        field = step(field, coeffs)
    return field


# ---------------------------------------------------------------------------
# initial data
# ---------------------------------------------------------------------------

def initial_constant(algebra: AlgebraData, n1: int) -> InitialData:
    """Constant group field: all currents zero."""
    m = algebra.matrix_size
    return InitialData(
        j1_row=np.zeros((n1, algebra.dim), dtype=np.complex128),
        j2_row=np.zeros((n1, algebra.dim), dtype=np.complex128),
        sigma_row=np.broadcast_to(np.eye(m, dtype=np.complex128), (n1, m, m)).copy(),
    )


def _admissible_j2(alg: AlgebraData, j1row: np.ndarray, h1: float, b: complex,
                   amplitude: float, rng: np.random.Generator) -> np.ndarray:
    """Transport of a monodromy-commutant seed: satisfies d1 j2 = b [j1, j2]."""
    n1 = j1row.shape[0]
    E = np.ascontiguousarray(_row_monodromy_factors(alg, j1row, h1, b))
    M = _accel.ordered_product(E)
    w, V = np.linalg.eig(M)
    k = int(np.argmin(np.abs(w - 1.0)))
    seed_vec = V[:, k]
    re = np.real(seed_vec)
    seed_vec = re if np.linalg.norm(re) > 1e-8 else np.real(1j * seed_vec)
    seed_vec = seed_vec / np.linalg.norm(seed_vec)
    sgn = rng.choice([-1.0, 1.0])
    j2 = np.empty((n1, alg.dim), dtype=np.complex128)
    j2[0] = sgn * amplitude * seed_vec
    for i in range(n1 - 1):
        j2[i + 1] = E[i] @ j2[i]
    closure = np.max(np.abs(E[n1 - 1] @ j2[n1 - 1] - j2[0]))
    if closure > 1e-8 * max(1.0, amplitude):
        raise NumericalError(f"admissible j2 row failed periodic closure ({closure:.2e})")
    return j2


def initial_random_fourier(algebra: AlgebraData, coeffs: EomCoefficients,
                           n1: int, L1: float, amplitude: float = 0.2,
                           amplitude2: float = 0.25, modes: int = 2,
                           seed: int = 0) -> InitialData:
    """Band-limited random periodic group row plus an admissible j2 row.

    The sigma row is exp of a band-limited real-coefficient field, so its
    edge currents close around the ring exactly; j2 is seeded in the
    commutant of the row monodromy (the periodic-closure constraint of the
    characteristic problem) and transported along the row.
    """
    rng = np.random.default_rng(np.random.Philox(seed))
    h1 = L1 / n1
    t1 = np.arange(n1) * h1
    lam = np.zeros((n1, algebra.dim))
    for m in range(1, modes + 1):
        ca = rng.standard_normal(algebra.dim) * amplitude / m
        sa = rng.standard_normal(algebra.dim) * amplitude / m
        lam += (np.outer(np.cos(2 * np.pi * m * t1 / L1), ca)
                + np.outer(np.sin(2 * np.pi * m * t1 / L1), sa))
    sigma_row = _group_exp_rows(algebra, lam.astype(np.complex128))

    j1row = _edge_currents(algebra, sigma_row, h1)
    b = (coeffs.ratio + 1.0) / 2.0
    j2row = _admissible_j2(algebra, j1row, h1, b, amplitude2, rng)
    return InitialData(j1_row=j1row, j2_row=j2row, sigma_row=sigma_row)


def initial_from_arrays(algebra: AlgebraData, coeffs: EomCoefficients,
                        lam_row: np.ndarray, j2_seed: np.ndarray,
                        L1: float) -> InitialData:
    """Initial data from explicit fields: group log row and a j2 seed vector.

    ``lam_row`` (n1, dim) generates the sigma row; ``j2_seed`` (dim,) is
    projected onto the row-monodromy commutant before transport so the
    result is admissible.
    """
    n1 = lam_row.shape[0]
    h1 = L1 / n1
    sigma_row = _group_exp_rows(algebra, np.asarray(lam_row, dtype=np.complex128))
    j1row = _edge_currents(algebra, sigma_row, h1)
    b = (coeffs.ratio + 1.0) / 2.0
    E = np.ascontiguousarray(_row_monodromy_factors(algebra, j1row, h1, b))
    M = _accel.ordered_product(E)
    w, V = np.linalg.eig(M)
    Vinv = np.linalg.inv(V)
    comp = Vinv @ np.asarray(j2_seed, dtype=np.complex128)
    comp = np.where(np.abs(w - 1.0) < 1e-6, comp, 0.0)
    seed_vec = V @ comp
    j2 = np.empty((n1, algebra.dim), dtype=np.complex128)
    j2[0] = seed_vec
    for i in range(n1 - 1):
        j2[i + 1] = E[i] @ j2[i]
    return InitialData(j1_row=j1row, j2_row=j2, sigma_row=sigma_row)


def _edge_currents(alg: AlgebraData, sigma_row: np.ndarray, h1: float) -> np.ndarray:
    """Site currents from edge transports: average of adjacent edge logs."""
    nxt = np.roll(sigma_row, -1, axis=0)
    transports = nxt @ np.linalg.inv(sigma_row)
    logs = logm(transports) / h1
    edge = np.einsum("iab,cba->ic", logs, alg.basis) @ alg.kappa_inv.T
    return 0.5 * (edge + np.roll(edge, 1, axis=0))


def left_translate(initial: InitialData, g: np.ndarray, algebra: AlgebraData) -> InitialData:
    """Left-multiply the group row by a constant element; currents conjugate."""
    ginv = np.linalg.inv(g)
    mats1 = np.einsum("ia,ajk->ijk", initial.j1_row, algebra.basis)
    mats2 = np.einsum("ia,ajk->ijk", initial.j2_row, algebra.basis)
    conj1 = g @ mats1 @ ginv
    conj2 = g @ mats2 @ ginv
    to_coeff = lambda mats: np.einsum("ijk,akj->ia", mats, algebra.basis) @ algebra.kappa_inv.T
    return InitialData(
        j1_row=to_coeff(conj1),
        j2_row=to_coeff(conj2),
        sigma_row=g @ initial.sigma_row,
    )


# ---------------------------------------------------------------------------
# diagnostics
# ---------------------------------------------------------------------------

def _centered_d1(rows: np.ndarray, h1: float) -> np.ndarray:
    return (np.roll(rows, -1, axis=0) - np.roll(rows, 1, axis=0)) / (2 * h1)


def eom_residual(field: LatticeField, coeffs: EomCoefficients) -> np.ndarray:
    """Pointwise group-level residual rho(d1j2 + d2j1) - gamma [j1,j2].

    Centered differences; shape (n1, n2-2, dim) over interior rows.
    """
    gam = coeffs.ratio
    d1j2 = _centered_d1(field.j2, field.h1)[:, 1:-1]
    d2j1 = (field.j1[:, 2:] - field.j1[:, :-2]) / (2 * field.h2)
    br = np.einsum("abc,ina,inb->inc", field.algebra.f,
                   field.j1[:, 1:-1], field.j2[:, 1:-1])
    return coeffs.rho * (d1j2 + d2j1 - gam * br)


def mc_residual(field: LatticeField) -> np.ndarray:
    """Discrete Maurer-Cartan residual d1j2 - d2j1 - [j1,j2] on interior rows."""
    d1j2 = _centered_d1(field.j2, field.h1)[:, 1:-1]
    d2j1 = (field.j1[:, 2:] - field.j1[:, :-2]) / (2 * field.h2)
    br = np.einsum("abc,ina,inb->inc", field.algebra.f,
                   field.j1[:, 1:-1], field.j2[:, 1:-1])
    return d1j2 - d2j1 - br


def current_consistency(field: LatticeField) -> float:
    """Max deviation between stored j1 and the log-derivative of sigma rows."""
    worst = 0.0
    for n in range(field.n2):
        row = field.sigma[:, n]
        j1 = _edge_currents(field.algebra, row, field.h1)
        worst = max(worst, float(np.max(np.abs(j1 - field.j1[:, n]))))
    return worst


def energy_rows(field: LatticeField) -> np.ndarray:
    """Chiral energy diagnostic per row: h1 * sum_i <j1, j1>; t2-independent."""
    kap = field.algebra.kappa
    vals = np.einsum("ina,ab,inb->n", field.j1, kap, field.j1)
    return field.h1 * vals


def cross_energy_rows(field: LatticeField) -> np.ndarray:
    """Row integral of <j1, j2> (reported alongside the chiral diagnostic)."""
    kap = field.algebra.kappa
    vals = np.einsum("ina,ab,inb->n", field.j1, kap, field.j2)
    return field.h1 * vals


def lattice_jets(field: LatticeField) -> dict:
    """Second-order jets at interior points in per-point normal coordinates.

    Returns v1, v2, s2 arrays of shape (n1, n2-2, dim) with
    s2 = (d1 j2 + d2 j1) / 2.
    """
    d1j2 = _centered_d1(field.j2, field.h1)[:, 1:-1]
    d2j1 = (field.j1[:, 2:] - field.j1[:, :-2]) / (2 * field.h2)
    return {
        "v1": field.j1[:, 1:-1].copy(),
        "v2": field.j2[:, 1:-1].copy(),
        "s2": 0.5 * (d1j2 + d2j1),
    }
