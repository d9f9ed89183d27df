import numpy as np
import pytest

from conftest import abelian_stub, rng
from cp1lax import betaflow as bf
from cp1lax.curve import ModelParams
from cp1lax.errors import ConfigurationError
from cp1lax.geometry import geometry_tensors
from cp1lax.lie import killing_form


def test_closed_period_examples():
    par = ModelParams(p1=1, p2=-1, eps=0.2)
    P1, _ = bf.periods(par)
    assert abs(P1) < 1e-12
    par = ModelParams(p1=1, p2=2, eps=0.2)
    P1, _ = bf.periods(par)
    assert abs(P1 + 6j * np.pi) < 1e-10


def test_open_period_quadrature_matches_antiderivative():
    par = ModelParams(p1=1, p2=2, eps=0.2)
    _, P2 = bf.periods(par)
    # 2(p2 - p1) - (p1 + p2) log(p2/p1) = 2 - 3 log 2 on the straight path
    want = 2.0 - 3.0 * np.log(2.0)
    assert abs(P2 - want) < 1e-8
    assert abs(bf.open_period_closed_form(par) - want) < 1e-14


def test_open_period_detours_around_origin():
    # the straight segment from 1 to -1 crosses the origin; the detoured
    # path must agree with the antiderivative (P1 = 0 here, so no branch
    # ambiguity: G(z) = z + 1/z gives G(-1) - G(1) = -4)
    par = ModelParams(p1=1, p2=-1, eps=0.2)
    _, P2 = bf.periods(par)
    assert abs(P2 + 4.0) < 1e-8


def test_flow_step_examples():
    par = ModelParams(p1=1, p2=2, eps=0.2)
    state = bf.flow_state(par)
    assert abs(state.c_flow - (1 * 2) / (1 - 2) ** 2) < 1e-14
    assert bf.flow_step(state, 0.0) is state

    d = 1e-4
    plus, minus = bf.flow_step(state, d), bf.flow_step(state, -d)
    dp2 = (plus.P2 - minus.P2) / (2 * d)
    assert abs(dp2 - 1.0) < 1e-6
    assert abs(plus.P1 - state.P1) < 1e-12
    assert abs(minus.P1 - state.P1) < 1e-12


def test_flow_admissibility_guard():
    par = ModelParams(p1=1, p2=1.2, eps=0.04)
    state = bf.flow_state(par)
    collide = float(np.real((par.p2 - par.p1) / (2 * state.c_flow)))
    with pytest.raises(ConfigurationError):
        bf.flow_step(state, collide)  # points meet: inadmissible


def test_beta_check_su2_identities(su2):
    par = ModelParams(p1=1, p2=2, eps=0.2)
    rep = bf.beta_check(par, su2, 256)
    assert rep["contraction_identity_residual"] <= 1e-12
    assert rep["beta_vs_kappa_rel"] <= 1e-10
    assert rep["beta_vs_metric_rel"] <= 1e-10
    assert rep["flow_match_rel"] <= 1e-10
    assert rep["wzw_factor_exact"] == 0.0
    assert rep["pairing_rescale"] == pytest.approx(4.0)
    fitted = rep["fitted_alpha_prime"][0] + 1j * rep["fitted_alpha_prime"][1]
    assert abs(fitted - 4j * np.pi) < 1e-8
    # probe sequence trends to zero as p1 -> 0
    vals = [v for _, v in rep["wzw_probe"]]
    assert all(b < a for a, b in zip(vals, vals[1:]))


def test_beta_symmetric_points_closed_form(su2):
    # p1 p2 = -1 and (p1 - p2)^2 = 4: beta = -(alpha'/4) kappa_hat
    par = ModelParams(p1=1, p2=-1, eps=0.2)
    rep = bf.beta_check(par, su2, 256)
    beta = np.array([[complex(re, im) for re, im in row] for row in rep["beta"]])
    want = -(par.alpha_prime / 4.0) * killing_form(su2)
    assert np.max(np.abs(beta - want)) < 1e-10 * np.max(np.abs(want))


def test_beta_abelian_stub_vanishes():
    par = ModelParams(p1=1, p2=2, eps=0.2)
    rep = bf.beta_check(par, abelian_stub(), 128)
    beta = np.array([[complex(re, im) for re, im in row] for row in rep["beta"]])
    assert np.max(np.abs(beta)) == 0.0


def test_beta_rescaling_invariance(su2):
    """beta_ab/kappa_ab * (p1-p2)^2/(p1 p2) is scale invariant."""
    r = rng(41)
    vals = []
    for _ in range(10):
        mu = complex(r.uniform(0.5, 2.0), r.uniform(-0.5, 0.5))
        p1, p2 = mu * 1.0, mu * 2.0
        par = ModelParams(p1=p1, p2=p2, eps=0.2 * min(abs(p1 - p2), abs(p1)) / 4)
        rep = bf.beta_check(par, su2, 256)
        beta = np.array([[complex(re, im) for re, im in row] for row in rep["beta"]])
        kap_hat = killing_form(su2)
        ratio = beta[0, 0] / kap_hat[0, 0] * (p1 - p2) ** 2 / (p1 * p2)
        vals.append(ratio)
    for v in vals[1:]:
        assert abs(v - vals[0]) < 1e-10 * abs(vals[0])


def test_flow_rescales_metric_at_first_order(su2):
    par = ModelParams(p1=1, p2=2, eps=0.05)
    g0 = geometry_tensors(par, su2, 256).g
    factor = 2.0 * par.p1 * par.p2 / (par.p1 - par.p2) ** 3
    for eps_step in (1e-3, 5e-4):
        state = bf.flow_state(par)
        flowed = bf.flow_step(state, eps_step)
        g1 = geometry_tensors(flowed.params, su2, 256).g
        predicted = (1.0 + eps_step * factor) * g0
        err = np.max(np.abs(g1 - predicted)) / np.max(np.abs(g0))
        # within O(eps^2); here the prediction is exact (the metric depends
        # linearly on p1 - p2 and the flow shifts it by 2 eps c), so the
        # deviation sits at rounding level
        assert err < 10 * eps_step**2
        assert err < 1e-12
