"""Spectral-curve data on the Riemann sphere and the contour-integral calculus.

The curve carries the rational 1-form

    omega = (z - p1)(z - p2) / z^2  dz

with simple zeroes at the marked points p1, p2 and double poles at 0 and
infinity.  Distributional (0,1)-forms are represented by densities on the
circle ``|z - p1| = eps``; every integral the package needs reduces to 1D
contour quadrature (uniform trapezoid, spectrally accurate for analytic
integrands).

Mollifier convention
--------------------
The circle delta is realized as ``dbar(u)`` of a radially symmetric
mollified inside step ``u`` (1 inside, 0 outside).  Products of step
functions evaluated on their own contour are resolved by the moment rule

    integral of u^k against the delta  ->  1 / (k + 1),

i.e. a single step contributes 1/2, its square 1/3.  Boundary values of
nested inverse transforms therefore carry polynomial-in-u profiles; the
engine tracks them as ``{power: samples}`` dictionaries.

Inverse dbar transforms
-----------------------
The two inverses act on contour densities ``rho`` through the Szego kernel
paired with omega (the kernel is a section twisted by O(D_1) x O(D_2), so
omega is the measure that makes ``S * omega * rho`` a 1-form):

    dbar1_inv rho (w) = (1/2 pi i) oint K1(w, z) rho(z) dz,
    K1(w, z) = w (z - p1) / (z (z - w) (w - p1)),

and K2 with the roles of p1 and p2 exchanged (kernel slots swapped, sign
flipped).  K1 = -S(w, z) omega(z)/dz and K2 = +S(z, w) omega(z)/dz in terms
of the kernel coefficient S of `szego_coeff`.  Outputs live in the section
space with a simple pole at p1 (resp. p2) only, vanishing at 0 and infinity.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, IllConditionedEvaluation, PoleError
from .lie import AlgebraData, AlgElement

__all__ = [
    "ModelParams", "ContourDensity", "Contour",
    "omega_coeff", "szego_coeff", "szego",
    "basis_density", "dbar1_inv", "dbar2_inv",
]


@dataclass(frozen=True)
class ModelParams:
    """Marked points, contour radius, and the RG normalization constant."""

    p1: complex
    p2: complex
    eps: float
    alpha_prime: complex = 4j * np.pi

    def __post_init__(self):
        object.__setattr__(self, "p1", complex(self.p1))
        object.__setattr__(self, "p2", complex(self.p2))
        object.__setattr__(self, "eps", float(self.eps))
        object.__setattr__(self, "alpha_prime", complex(self.alpha_prime))
        p1, p2 = self.p1, self.p2
        if p1 == p2:
            raise ConfigurationError("marked points must be distinct (p1 != p2)")
        if p1 == 0 or p2 == 0:
            raise ConfigurationError("marked points must avoid the double pole at 0")
        if not (self.eps > 0):
            raise ConfigurationError("contour radius eps must be positive")
        limit = min(abs(p1 - p2), abs(p1)) / 4.0
        if self.eps >= limit:
            raise ConfigurationError(
                f"eps={self.eps} too large; the circle |z-p1|=eps must enclose p1 "
                f"only (need eps < min(|p1-p2|, |p1|)/4 = {limit:.6g})")

    def pole_coefficient(self, z: complex) -> complex:
        """The rational factor (p1-p2) z / ((z-p1)(z-p2)) of the basis forms."""
        z = np.asarray(z, dtype=np.complex128)
        return (self.p1 - self.p2) * z / ((z - self.p1) * (z - self.p2))


def omega_coeff(params: ModelParams, z: complex) -> complex:
    """Coefficient function omega/dz = (z-p1)(z-p2)/z^2 (double pole at 0)."""
    z = np.asarray(z, dtype=np.complex128)
    if np.any(np.abs(z) == 0):
        raise PoleError("omega has a double pole at z = 0")
    return (z - params.p1) * (z - params.p2) / z**2


def szego_coeff(params: ModelParams, z: complex, zp: complex) -> complex:
    """Scalar coefficient of the kernel: z zp / ((z - zp)(z - p1)(zp - p2)).

    Simple pole along the diagonal and at z = p1, zp = p2; simple zeroes at
    z, zp in {0, infinity}.  The omega-trivialized diagonal residue is 1.
    """
    if z == zp:
        raise PoleError("kernel evaluated on the diagonal z == z'")
    if z == params.p1:
        raise PoleError("kernel has a pole at z == p1")
    if zp == params.p2:
        raise PoleError("kernel has a pole at z' == p2")
    return z * zp / ((z - zp) * (z - params.p1) * (zp - params.p2))


def szego(params: ModelParams, algebra: AlgebraData, z: complex, zp: complex) -> np.ndarray:
    """Kernel as a 2-tensor over the algebra: coefficient times the Casimir."""
    return szego_coeff(params, z, zp) * algebra.casimir


@dataclass(frozen=True)
class ContourDensity:
    """Algebra-valued density on the uniform circle grid around p1.

    ``samples[k]`` holds the coefficients at theta_k = 2 pi k / N.  The
    implicit measure is the circle delta (the (0,1)-form dbar u).
    """

    thetas: np.ndarray          # (N,)
    samples: np.ndarray         # (N, dim) complex
    params: ModelParams

    def __post_init__(self):
        n = len(self.thetas)
        if n < 16 or n % 2:
            raise ConfigurationError("contour grid needs N >= 16 and even")

    @property
    def n_nodes(self) -> int:
        return len(self.thetas)


class Contour:
    """Quadrature grid on |z - p1| = eps with the profile calculus.

    Profiles are dictionaries ``{u-power: (N,) samples}``; densities carry
    an implicit factor dbar(u).  ``pair`` evaluates
    ``oint (omega/dz) X rho`` with the moment weights described in the
    module docstring.
    """

    def __init__(self, params: ModelParams, n_nodes: int):
        if n_nodes < 16 or n_nodes % 2:
            raise ConfigurationError("contour grid needs N >= 16 and even")
        self.params = params
        self.n = n_nodes
        self.thetas = 2.0 * np.pi * np.arange(n_nodes) / n_nodes
        phase = np.exp(1j * self.thetas)
        self.z = params.p1 + params.eps * phase
        # dz weights for the trapezoid rule on the circle
        self.dz = 1j * params.eps * phase * (2.0 * np.pi / n_nodes)
        self.z_off = params.p1 + params.eps * np.exp(1j * (self.thetas + np.pi / n_nodes))
        self._omega = omega_coeff(params, self.z)
        self._freq = np.fft.fftfreq(n_nodes, d=1.0 / n_nodes)

    # -- spectral half-step resampling -------------------------------------
    def _shift(self, vals: np.ndarray, sign: int) -> np.ndarray:
        """Trig-interpolate samples to the grid shifted by sign * (pi/N)."""
        return np.fft.ifft(np.fft.fft(vals) * np.exp(sign * 1j * self._freq * np.pi / self.n))

    # -- scalar contour integral -------------------------------------------
    def integrate(self, vals: np.ndarray) -> complex:
        return complex(np.sum(vals * self.dz))

    def base_scalar(self) -> np.ndarray:
        """Samples of the pole coefficient F on the grid."""
        return self.params.pole_coefficient(self.z)

    # -- kernels ------------------------------------------------------------
    def _k1(self, w, z):
        p1 = self.params.p1
        return w * (z - p1) / (z * (z - w) * (w - p1))

    def _k2(self, w, z):
        p2 = self.params.p2
        return w * (z - p2) / (z * (z - w) * (w - p2))

    def _guard(self, w: complex) -> None:
        dist = abs(abs(w - self.params.p1) - self.params.eps)
        if dist < self.params.eps / self.n:
            raise IllConditionedEvaluation(
                f"evaluation point {w} within eps/N of the quadrature contour")

    # -- point transforms (w off the contour) --------------------------------
    def transform_at(self, which: int, density: dict, w: complex) -> complex:
        """Inverse-dbar transform of a profile density at an off-contour point."""
        self._guard(w)
        kern = self._k1(w, self.z) if which == 1 else self._k2(w, self.z)
        tot = 0.0 + 0.0j
        for k, vals in density.items():
            tot += np.sum(kern * vals * self.dz) / (2j * np.pi) / (k + 1)
        return complex(tot)

    # -- boundary transforms (outside-limit values on the grid) --------------
    def boundary_minus(self, which: int, vals: np.ndarray) -> np.ndarray:
        """Outside boundary value of the inverse transform of ``vals * dbar u``.

        Plemelj with the singularity subtracted: the kernel's diagonal
        residue is 1, so the principal value contributes vals/2 which
        cancels against the half-jump, leaving the plain trapezoid of the
        subtracted integrand.  Evaluated on the half-offset grid and
        resampled back, so no node sits on the kernel diagonal.
        """
        g_off = self._shift(vals, +1)
        out = np.empty(self.n, dtype=np.complex128)
        kern = self._k1 if which == 1 else self._k2
        for m in range(self.n):
            w0 = self.z_off[m]
            integrand = kern(w0, self.z) * (vals - g_off[m])
            out[m] = np.sum(integrand * self.dz) / (2j * np.pi)
        return self._shift(out, -1)

    # -- profile algebra ------------------------------------------------------
    @staticmethod
    def profile_mul(a: dict, b: dict) -> dict:
        out: dict = {}
        for j, fa in a.items():
            for k, fb in b.items():
                key = j + k
                out[key] = out.get(key, 0) + fa * fb
        return out

    def dbar_profile(self, which: int, density: dict) -> dict:
        """On-contour profile of the inverse transform of a profile density.

        A density component ``h u^k dbar u`` inverts to the profile
        ``h u^(k+1) / (k+1)`` plus the outside part of the transform of
        ``h/(k+1)`` at power zero.
        """
        out: dict = {}
        for k, vals in density.items():
            scaled = vals / (k + 1)
            out[k + 1] = out.get(k + 1, 0) + scaled
            out[0] = out.get(0, 0) + self.boundary_minus(which, scaled)
        return out

    def pair(self, func: dict, density: dict) -> complex:
        """Quadrature of oint omega ^ (func x density) with moment weights."""
        tot = 0.0 + 0.0j
        for j, fv in func.items():
            for k, dv in density.items():
                tot += np.sum(self._omega * fv * dv * self.dz) / (j + k + 1)
        return complex(tot)


# -- public density constructors and transforms ------------------------------

def basis_density(params: ModelParams, algebra: AlgebraData, a: int, n_nodes: int) -> ContourDensity:
    """Density of the concentrated basis form for generator index ``a``."""
    contour = Contour(params, n_nodes)
    samples = np.zeros((n_nodes, algebra.dim), dtype=np.complex128)
    samples[:, a] = contour.base_scalar()
    return ContourDensity(contour.thetas, samples, params)


def _transform_density(which: int, params: ModelParams, algebra: AlgebraData,
                       rho: ContourDensity, w: complex) -> AlgElement:
    contour = Contour(params, rho.n_nodes)
    coeffs = np.empty(algebra.dim, dtype=np.complex128)
    for a in range(algebra.dim):
        coeffs[a] = contour.transform_at(which, {0: rho.samples[:, a]}, w)
    # Casimir contraction: kappa^{bc} t_b <t_c, .> acts as the identity on
    # coefficients; keep it explicit so a rescaled pairing stays correct.
    coeffs = algebra.kappa_inv @ (algebra.kappa @ coeffs)
    return AlgElement(coeffs, algebra)


def dbar1_inv(params: ModelParams, algebra: AlgebraData, rho: ContourDensity, w: complex) -> AlgElement:
    """First inverse-dbar transform of a contour density, evaluated at w.

    The result has (numerically) a simple pole at p1 only and vanishes at
    0 and infinity; for the basis densities it reproduces the pole
    coefficient inside the contour and 0 outside.
    """
    return _transform_density(1, params, algebra, rho, w)


def dbar2_inv(params: ModelParams, algebra: AlgebraData, rho: ContourDensity, w: complex) -> AlgElement:
    """Second inverse-dbar transform (pole locus p2, complementary support)."""
    return _transform_density(2, params, algebra, rho, w)
