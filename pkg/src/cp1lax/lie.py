"""Numerical Lie theory for su(n): bases, brackets, pairing, exponentials.

Conventions
-----------
Generators are anti-Hermitian and normalized so that the invariant pairing
(defining-representation trace form) is ``<t_a, t_b> = tr(t_a t_b) = -delta_ab / 2``.
For su(2) the basis is ``t_a = -(i/2) sigma_a`` and the structure constants
are ``f_ab^c = epsilon_abc``.  For general su(n) the basis is the
anti-Hermitian generalized Gell-Mann family in (symmetric, antisymmetric,
diagonal) order.
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError
from .matutil import expm

__all__ = [
    "AlgebraData", "AlgElement", "GroupElement",
    "make_algebra", "bracket", "pairing", "group_exp", "adjoint",
    "killing_form", "ad_matrix", "random_element",
]


@dataclass(frozen=True)
class AlgebraData:
    """Finite-dimensional Lie algebra in a fixed matrix basis.

    Immutable after construction; safe to share across threads.
    """

    name: str
    dim: int
    basis: np.ndarray          # (dim, n, n) complex matrices t_a
    f: np.ndarray              # (dim, dim, dim): f[a, b, c] = f_ab^c
    kappa: np.ndarray          # (dim, dim): kappa_ab = <t_a, t_b>
    kappa_inv: np.ndarray      # inverse of kappa
    casimir: np.ndarray        # (dim, dim) coefficients of kappa^{ab} t_a (x) t_b
    f_low: np.ndarray = field(repr=False, default=None)  # f[a,b,c] = <[t_a,t_b], t_c>

    @property
    def matrix_size(self) -> int:
        return self.basis.shape[1]

    def element(self, coeffs) -> "AlgElement":
        return AlgElement(np.asarray(coeffs, dtype=np.complex128), self)

    def coeffs_of(self, mat: np.ndarray) -> np.ndarray:
        """Basis coefficients of a matrix: c^a = kappa^{ab} tr(mat t_b)."""
        traces = np.einsum("ij,aji->a", mat, self.basis)
        return self.kappa_inv @ traces


@dataclass(frozen=True)
class AlgElement:
    """Algebra element as a coefficient vector in the basis {t_a}."""

    coeffs: np.ndarray
    algebra: AlgebraData

    def matrix(self) -> np.ndarray:
        return np.einsum("a,aij->ij", self.coeffs, self.algebra.basis)

    def __add__(self, other: "AlgElement") -> "AlgElement":
        _check_same(self, other)
        return AlgElement(self.coeffs + other.coeffs, self.algebra)

    def __sub__(self, other: "AlgElement") -> "AlgElement":
        _check_same(self, other)
        return AlgElement(self.coeffs - other.coeffs, self.algebra)

    def __mul__(self, scalar) -> "AlgElement":
        return AlgElement(self.coeffs * scalar, self.algebra)

    __rmul__ = __mul__

    def norm(self) -> float:
        return float(np.linalg.norm(self.coeffs))


@dataclass(frozen=True)
class GroupElement:
    """Group element as a complex matrix in the defining representation."""

    mat: np.ndarray
    algebra: AlgebraData

    def inverse(self) -> "GroupElement":
        return GroupElement(np.linalg.inv(self.mat), self.algebra)

    def unitarity_defect(self) -> float:
        n = self.mat.shape[0]
        return float(np.max(np.abs(self.mat @ self.mat.conj().T - np.eye(n))))


def _check_same(x: AlgElement, y: AlgElement) -> None:
    if x.algebra is not y.algebra and x.algebra.name != y.algebra.name:
        raise ConfigurationError("elements belong to different algebras")
    if x.coeffs.shape != y.coeffs.shape:
        raise ConfigurationError("coefficient dimension mismatch")


def _su2_basis() -> np.ndarray:
    s1 = np.array([[0, 1], [1, 0]], dtype=np.complex128)
    s2 = np.array([[0, -1j], [1j, 0]], dtype=np.complex128)
    s3 = np.array([[1, 0], [0, -1]], dtype=np.complex128)
    return np.stack([-0.5j * s1, -0.5j * s2, -0.5j * s3])


def _sun_basis(n: int) -> np.ndarray:
    """Anti-Hermitian generalized Gell-Mann basis with tr(t_a t_b) = -delta/2."""
    gens = []
    for k in range(n):          # symmetric off-diagonal
        for j in range(k):
            m = np.zeros((n, n), dtype=np.complex128)
            m[j, k] = m[k, j] = 1.0
            gens.append(m)
    for k in range(n):          # antisymmetric off-diagonal
        for j in range(k):
            m = np.zeros((n, n), dtype=np.complex128)
            m[j, k] = -1j
            m[k, j] = 1j
            gens.append(m)
    for k in range(1, n):       # diagonal
        m = np.zeros((n, n), dtype=np.complex128)
        m[:k, :k] = np.eye(k)
        m[k, k] = -k
        m *= np.sqrt(2.0 / (k * (k + 1)))
        gens.append(m)
    lam = np.stack(gens)        # Hermitian, tr(lam_a lam_b) = 2 delta_ab
    return -0.5j * lam


def make_algebra(name: str, n: int = 2) -> AlgebraData:
    """Build AlgebraData for an algebra id.

    Supported ids: ``su(2)`` and ``su(n)`` (with ``n >= 2``).  Structure
    constants, pairing, and Casimir coefficients are computed from the
    basis matrices directly.
    """
    if name == "su(2)":
        basis = _su2_basis()
    elif name == "su(n)":
        if n < 2:
            raise ConfigurationError(f"su(n) requires n >= 2, got n={n}")
        basis = _sun_basis(n)
    else:
        raise ConfigurationError(f"unsupported algebra id {name!r}")

    kappa = np.einsum("aij,bji->ab", basis, basis)
    kappa_inv = np.linalg.inv(kappa)
    comm = np.einsum("aij,bjk->abik", basis, basis)
    comm = comm - np.transpose(comm, (1, 0, 2, 3))
    f_low = np.einsum("abij,cji->abc", comm, basis)   # <[t_a,t_b], t_c>
    f = np.einsum("abd,dc->abc", f_low, kappa_inv)
    return AlgebraData(
        name=name if name != "su(n)" else f"su({n})",
        dim=basis.shape[0],
        basis=basis,
        f=f,
        kappa=kappa,
        kappa_inv=kappa_inv,
        casimir=kappa_inv.copy(),
        f_low=f_low,
    )


def bracket(x: AlgElement, y: AlgElement) -> AlgElement:
    """Lie bracket [x, y] in basis coefficients."""
    _check_same(x, y)
    alg = x.algebra
    return AlgElement(np.einsum("abc,a,b->c", alg.f, x.coeffs, y.coeffs), alg)


def pairing(x: AlgElement, y: AlgElement) -> complex:
    """Invariant pairing <x, y> = x^a kappa_ab y^b."""
    _check_same(x, y)
    return complex(x.coeffs @ x.algebra.kappa @ y.coeffs)


def group_exp(x: AlgElement) -> GroupElement:
    """Exponential into the group, scaling-and-squaring Pade (~1e-13)."""
    return GroupElement(expm(x.matrix()), x.algebra)


def adjoint(g: GroupElement, x: AlgElement) -> AlgElement:
    """Adjoint action Ad_g x = g x g^{-1}, re-expressed in the basis."""
    alg = x.algebra
    mat = g.mat @ x.matrix() @ np.linalg.inv(g.mat)
    return AlgElement(alg.coeffs_of(mat), alg)


def ad_matrix(alg: AlgebraData, coeffs: np.ndarray) -> np.ndarray:
    """Matrix of ad(x) on coefficients: (ad x)^c_b = f_ab^c x^a.

    Batched: ``coeffs`` of shape (..., dim) gives (..., dim, dim).
    """
    return np.einsum("abc,...a->...cb", alg.f, coeffs)


def killing_form(alg: AlgebraData) -> np.ndarray:
    """Killing form K_ab = tr(ad t_a ad t_b), computed from f."""
    return np.einsum("acd,bdc->ab", alg.f, alg.f)


def random_element(alg: AlgebraData, rng: np.random.Generator, scale: float = 1.0) -> AlgElement:
    """Random real-coefficient element (tangent to the compact slice)."""
    return AlgElement(scale * rng.standard_normal(alg.dim).astype(np.complex128), alg)
