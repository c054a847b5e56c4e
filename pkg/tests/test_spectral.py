import math

import numpy as np
import pytest

from oracles import quad_lp, sine_mode
from shsim.errors import ConfigurationError, DomainError
from shsim.spectral import (
    GridField,
    SpectralField,
    apply_A,
    apply_semigroup,
    build_basis,
    from_grid,
    lp_power,
    norms,
    project_Zn,
    to_grid,
)


def test_interval_eigenvalues():
    b = build_basis(math.pi, 4, 16)
    np.testing.assert_array_equal(b.lam, [1, 4, 9, 16])
    np.testing.assert_array_equal(b.mu, [3, 24, 99, 288])
    assert build_basis(math.pi, 1, 8).mu[0] == 3


def test_rectangle_ordering_and_ties():
    b = build_basis((math.pi, math.pi), 2, 16)
    np.testing.assert_allclose(b.lam, [2, 5, 5, 8])
    assert b.modes.tolist() == [[1, 1], [1, 2], [2, 1], [2, 2]]


def test_mu_identity_and_monotone():
    b = build_basis(2.7, 12)
    assert np.all(b.lam > 0) and np.all(np.diff(b.lam) >= 0)
    np.testing.assert_array_equal(b.mu, b.lam**2 + 2 * b.lam)


@pytest.mark.parametrize("kwargs", [
    dict(lengths=-1.0, n_modes=4),
    dict(lengths=(1.0, 0.0), n_modes=4),
    dict(lengths=math.pi, n_modes=0),
    dict(lengths=math.pi, n_modes=4, quad_points=11),
    dict(lengths=math.pi, n_modes=4, quad_points=19, n_exp=2),
])
def test_build_basis_rejects(kwargs):
    with pytest.raises(ConfigurationError):
        build_basis(**kwargs)


def test_e1_grid_values():
    b = build_basis(math.pi, 4, 16)
    g = to_grid(SpectralField.mode(b, 1))
    x = b.nodes()[0]
    np.testing.assert_allclose(g.values, math.sqrt(2 / math.pi) * np.sin(x), atol=1e-14)


def test_round_trip_random():
    rng = np.random.default_rng(3)
    for dims in (math.pi, (2.0, 3.0)):
        b = build_basis(dims, 6)
        for _ in range(20):
            c = rng.standard_normal(b.size)
            u = SpectralField(c / np.linalg.norm(c), b)
            back = from_grid(to_grid(u))
            assert np.max(np.abs(back.coeffs - u.coeffs)) <= 1e-12


def test_zero_round_trip():
    b = build_basis(math.pi, 5)
    g = to_grid(SpectralField.zeros(b))
    assert not g.values.any()
    assert not from_grid(g).coeffs.any()


def test_grid_shape_mismatch():
    b = build_basis(math.pi, 4)
    with pytest.raises(DomainError):
        GridField(np.zeros(3), b)


def test_e1_norms():
    b = build_basis(math.pi, 8)
    n = norms(SpectralField.mode(b, 1), p=4)
    assert n["h1"] == pytest.approx(1.0, abs=1e-15)
    assert n["h2"] == pytest.approx(1.0, abs=1e-15)
    assert n["V"] ** 2 == pytest.approx(2.0, abs=1e-14)
    assert n["DA"] ** 2 == pytest.approx(20.0, abs=1e-13)


def test_l4_norm_of_e1_matches_quadrature():
    b = build_basis(math.pi, 8)
    ref = quad_lp(sine_mode(1), 4)
    assert ref == pytest.approx(3 / (2 * math.pi), rel=1e-12)
    assert lp_power(b, b.unit(1), 4) == pytest.approx(ref, rel=1e-12)


def test_odd_power_against_quadrature():
    b = build_basis(math.pi, 8)
    c = b.unit(1) + 0.5 * b.unit(2)
    fun = lambda x: sine_mode(1)(x) + 0.5 * sine_mode(2)(x)  # noqa: E731
    assert lp_power(b, c, 3) == pytest.approx(quad_lp(fun, 3), rel=1e-3)


def test_lp_rejects_small_p():
    b = build_basis(math.pi, 4)
    with pytest.raises(DomainError):
        norms(SpectralField.mode(b, 1), p=0.5)


def test_A_on_e2():
    b = build_basis(math.pi, 4)
    assert norms(SpectralField.mode(b, 2))["Au_l2"] == 24.0
    np.testing.assert_array_equal(apply_A(SpectralField.mode(b, 1)).coeffs, 3 * b.unit(1))


def test_semigroup():
    b = build_basis(math.pi, 4)
    e1 = SpectralField.mode(b, 1)
    assert apply_semigroup(e1, math.log(2) / 3).coeffs[0] == pytest.approx(0.5, abs=1e-15)
    assert apply_semigroup(e1, 0.0).coeffs.tolist() == e1.coeffs.tolist()
    with pytest.raises(DomainError):
        apply_semigroup(e1, -1e-3)


def test_projection():
    b = build_basis(math.pi, 4)
    u = SpectralField(b.unit(1) + b.unit(3), b)
    assert project_Zn(u, 2).coeffs.tolist() == b.unit(1).tolist()
    assert project_Zn(u, 4).coeffs.tolist() == u.coeffs.tolist()
    for bad in (0, 5):
        with pytest.raises(DomainError):
            project_Zn(u, bad)


def test_projection_self_adjoint_and_commutes_with_A():
    b = build_basis(math.pi, 10)
    rng = np.random.default_rng(0)
    for _ in range(50):
        u = SpectralField(rng.standard_normal(10), b)
        v = SpectralField(rng.standard_normal(10), b)
        n = int(rng.integers(1, 11))
        assert abs(project_Zn(u, n).inner(v) - u.inner(project_Zn(v, n))) <= 1e-14
        un = project_Zn(u, n)
        assert np.array_equal(project_Zn(apply_A(un), n).coeffs, apply_A(un).coeffs)


def test_field_rejects_nonfinite():
    b = build_basis(math.pi, 3)
    with pytest.raises(DomainError):
        SpectralField([1.0, np.nan, 0.0], b)
    with pytest.raises(DomainError):
        SpectralField([1.0, 0.0], b)


def test_field_arithmetic():
    b = build_basis(math.pi, 3)
    u = SpectralField.mode(b, 1)
    v = SpectralField.mode(b, 2)
    w = (2 * u - v) / 2
    np.testing.assert_array_equal(w.coeffs, [1.0, -0.5, 0.0])
    assert (-u).coeffs[0] == -1.0
    assert (u + v).norm() == pytest.approx(math.sqrt(2))
