import numpy as np
import pytest

from cp1lax.curve import ModelParams
from cp1lax.lie import AlgebraData, make_algebra


@pytest.fixture(scope="session")
def su2():
    return make_algebra("su(2)")


@pytest.fixture(scope="session")
def su3():
    return make_algebra("su(n)", 3)


@pytest.fixture(scope="session")
def params21():
    return ModelParams(p1=2, p2=1, eps=0.2)


@pytest.fixture(scope="session")
def params_sym():
    return ModelParams(p1=1, p2=-1, eps=0.2)


def abelian_stub() -> AlgebraData:
    """One-generator commutative algebra used as a degenerate test target."""
    basis = np.array([[[1j]]], dtype=np.complex128)
    kappa = np.array([[-1.0 + 0j]])
    return AlgebraData(
        name="u(1)-stub", dim=1, basis=basis,
        f=np.zeros((1, 1, 1), dtype=np.complex128),
        kappa=kappa, kappa_inv=np.linalg.inv(kappa),
        casimir=np.linalg.inv(kappa),
        f_low=np.zeros((1, 1, 1), dtype=np.complex128),
    )


@pytest.fixture()
def abelian():
    return abelian_stub()


def rng(seed: int = 0) -> np.random.Generator:
    return np.random.default_rng(np.random.Philox(seed))
