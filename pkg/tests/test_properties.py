import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from shsim.dynamics import ModelParams, drift_ito, drift_strat, nonlinearity_F
from shsim.geometry import NoiseModel, noise_field, project_tangent
from shsim.integrator import SimConfig, step
from shsim.spectral import SpectralField, build_basis, from_grid, norms, project_Zn, to_grid
from shsim.verification import elliptic_equivalence

B1 = build_basis(math.pi, 8, n_exp=2)
B2 = build_basis((2.0, 3.0), 3)
NOISE = NoiseModel.default(B1, 3)

finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)


def coeffs(size):
    return arrays(np.float64, size, elements=finite).filter(lambda c: np.linalg.norm(c) > 1e-3)


def unit(b, c):
    return SpectralField(c / np.linalg.norm(c), b)


@given(coeffs(B1.size))
def test_parseval_interval(c):
    u = SpectralField(c, B1)
    g = to_grid(u)
    assert abs(B1.weight * np.sum(g.values**2) - u.norm() ** 2) <= 1e-10 * (1 + u.norm() ** 2)
    assert np.allclose(from_grid(g).coeffs, c, atol=1e-10)


@given(coeffs(B2.size))
def test_parseval_rectangle(c):
    u = SpectralField(c, B2)
    g = to_grid(u)
    assert abs(B2.weight * np.sum(g.values**2) - u.norm() ** 2) <= 1e-10 * (1 + u.norm() ** 2)


@given(coeffs(B1.size))
def test_norm_chain(c):
    n = norms(SpectralField(c, B1))
    lam1 = B1.lam[0]
    tol = 1e-9 * n["DA"]
    assert math.sqrt(lam1) * n["l2"] <= n["h1"] + tol
    assert math.sqrt(lam1) * n["h1"] <= n["h2"] + tol
    assert n["h2"] <= n["V"] + tol and n["V"] <= n["DA"] + tol


@given(coeffs(B1.size), coeffs(B1.size), st.integers(1, B1.size))
def test_projection_properties(a, b, n):
    u, v = SpectralField(a, B1), SpectralField(b, B1)
    p = project_Zn(u, n)
    assert np.array_equal(project_Zn(p, n).coeffs, p.coeffs)
    assert abs(p.inner(v) - u.inner(project_Zn(v, n))) <= 1e-9 * (1 + u.norm() * v.norm())
    assert p.norm() <= u.norm() + 1e-12


@given(coeffs(B1.size), st.integers(1, 3))
def test_noise_field_tangent(c, k):
    u = unit(B1, c)
    B = noise_field(u, k, NOISE)
    assert abs(B.inner(u)) <= 1e-12


@given(coeffs(B1.size), coeffs(B1.size))
def test_tangent_projection_idempotent(c, h):
    u = unit(B1, c)
    h = SpectralField(h, B1)
    once = project_tangent(u, h)
    twice = project_tangent(u, once)
    assert np.allclose(once.coeffs, twice.coeffs, atol=1e-10 * (1 + h.norm()))
    assert abs(once.inner(u)) <= 1e-10 * (1 + h.norm())


@given(coeffs(B1.size))
def test_elliptic_equivalence(c):
    lo, hi, c1, c2 = elliptic_equivalence(B1, c[None])
    assert c1 - 1e-12 <= lo <= hi <= c2 + 1e-12


@settings(max_examples=50)
@given(coeffs(B1.size), st.sampled_from([1, 2]))
def test_F_odd(c, n_exp):
    u = SpectralField(c / 10, B1)
    p = ModelParams(n_exp)
    a, b = nonlinearity_F(u, p).coeffs, nonlinearity_F(-u, p).coeffs
    assert np.allclose(a, -b, atol=1e-9 * (1 + np.abs(a).max()))


@settings(max_examples=50)
@given(coeffs(B1.size), st.sampled_from([1, 2]))
def test_drift_tangent(c, n_exp):
    u = unit(B1, c / np.arange(1, B1.size + 1) ** 2)
    d = drift_strat(u, ModelParams(n_exp))
    assert abs(d.inner(u)) <= 1e-9 * (1 + d.norm())
    # Ito drift adds half of sum(-<f,B> u - <f,u> B), radial part -sum |B|^2 / 2
    di = drift_ito(u, ModelParams(n_exp), NOISE)
    expected = -0.5 * sum(noise_field(u, k, NOISE).norm() ** 2 for k in (1, 2, 3))
    assert abs(di.inner(u) - expected) <= 1e-9 * (1 + di.norm())


@pytest.mark.filterwarnings("ignore::shsim.integrator.StiffnessWarning")
@settings(max_examples=50, deadline=None)
@given(coeffs(4), st.sampled_from(["euler_ito", "heun_strat", "exp_euler_ito"]),
       arrays(np.float64, 2, elements=st.floats(-0.3, 0.3)))
def test_renormalized_step_stays_on_sphere(c, scheme, dW):
    b = build_basis(math.pi, 4)
    cfg = SimConfig(b, NoiseModel.default(b, 2), T=1e-2, dt=1e-2, scheme=scheme)
    out = step(unit(b, c / np.arange(1, 5) ** 2), 1e-2, dW, cfg)
    assert abs(out.norm() ** 2 - 1) <= 1e-12
