import math

import numpy as np
import pytest

from oracles import F_e1_coeffs, central_difference
from shsim.dynamics import (
    ModelParams,
    constrained_rhs,
    drift_ito,
    drift_strat,
    galerkin_rhs,
    nonlinearity_F,
)
from shsim.errors import ConfigurationError, DomainError
from shsim.geometry import (
    NoiseModel,
    OffSphereWarning,
    assert_on_sphere,
    ito_correction,
    noise_field,
    project_tangent,
)
from shsim.spectral import SpectralField, build_basis


@pytest.fixture
def b():
    return build_basis(math.pi, 8, n_exp=2)


def F(b, *rows):
    return NoiseModel(np.array(rows, dtype=float), b)


def test_project_tangent_examples(b):
    e1, e2 = SpectralField.mode(b, 1), SpectralField.mode(b, 2)
    assert project_tangent(e1, e2).coeffs.tolist() == e2.coeffs.tolist()
    assert not project_tangent(e1, e1).coeffs.any()
    u = (e1 + e2) / math.sqrt(2)
    out = project_tangent(u, e1)
    np.testing.assert_allclose(out.coeffs[:2], [0.5, -0.5], atol=1e-15)
    assert abs(out.inner(u)) <= 1e-15


def test_project_tangent_warns_off_sphere(b):
    with pytest.warns(OffSphereWarning):
        project_tangent(SpectralField.mode(b, 1, 2.0), SpectralField.mode(b, 2))


def test_noise_field_examples(b):
    e1 = SpectralField.mode(b, 1)
    nm = F(b, b.unit(2), b.unit(1), b.unit(1) + b.unit(2))
    assert noise_field(e1, 1, nm).coeffs.tolist() == b.unit(2).tolist()
    assert not noise_field(e1, 2, nm).coeffs.any()
    assert noise_field(e1, 3, nm).coeffs.tolist() == b.unit(2).tolist()
    for k in (0, 4):
        with pytest.raises(DomainError):
            noise_field(e1, k, nm)


def test_ito_correction_examples_and_fd(b):
    e1 = SpectralField.mode(b, 1)
    nm = F(b, b.unit(2), b.unit(1), b.unit(1) + b.unit(2))
    expected = [-b.unit(1), 0 * b.unit(1), -b.unit(1) - b.unit(2)]
    for k, exp in enumerate(expected, 1):
        m = ito_correction(e1, k, nm).coeffs
        np.testing.assert_allclose(m, exp, atol=1e-15)
        f = nm.directions[k - 1]
        Bfun = lambda c, f=f: f - np.dot(f, c) * c  # noqa: E731
        fd = central_difference(Bfun, e1.coeffs, Bfun(e1.coeffs))
        np.testing.assert_allclose(fd, exp, atol=1e-9)
    with pytest.raises(DomainError):
        ito_correction(e1, 9, nm)


def test_assert_on_sphere(b):
    assert assert_on_sphere(SpectralField.mode(b, 1)) == 0.0
    with pytest.warns(OffSphereWarning):
        assert assert_on_sphere(SpectralField.mode(b, 1, 2.0)) == 3.0
    u = (SpectralField.mode(b, 1) + SpectralField.mode(b, 2)) / math.sqrt(2)
    assert assert_on_sphere(u) <= 1e-15


def test_noise_model_validation_and_serialization(b):
    with pytest.raises(ConfigurationError):
        NoiseModel(np.zeros((0, b.size)), b)
    with pytest.raises(ConfigurationError):
        NoiseModel(np.zeros((1, 3)), b)
    with pytest.raises(ConfigurationError):
        NoiseModel.from_modes(b, [9], [1.0])
    d = NoiseModel.default(b, 3)
    assert d.to_config() == {"modes": [1, 2, 3], "amplitudes": [1.0, 0.25, 1 / 9]}
    assert np.array_equal(NoiseModel.from_config(b, d.to_config()).directions, d.directions)
    dense = F(b, b.unit(1) + b.unit(2))
    back = NoiseModel.from_config(b, dense.to_config())
    assert np.array_equal(back.directions, dense.directions)
    assert np.isfinite(d.V_norms()).all()


def test_F_examples_against_quadrature(b):
    e1 = SpectralField.mode(b, 1)
    f1 = nonlinearity_F(e1, ModelParams(1)).coeffs
    np.testing.assert_allclose(f1, 3 * b.unit(1), atol=1e-14)
    f2 = nonlinearity_F(e1, ModelParams(2)).coeffs
    ref = F_e1_coeffs(2, b.size)
    np.testing.assert_allclose(f2, ref, atol=1e-12)
    assert f2[0] == pytest.approx(3.0, abs=1e-13)
    assert f2[2] == pytest.approx(1 / (2 * math.pi), abs=1e-13)
    assert not nonlinearity_F(SpectralField.zeros(b), ModelParams(2)).coeffs.any()


def test_F_rejects_aliasing():
    b = build_basis(math.pi, 8)
    with pytest.raises(ConfigurationError):
        nonlinearity_F(SpectralField.mode(b, 1), ModelParams(2))


def test_model_params_validation():
    with pytest.raises(ConfigurationError):
        ModelParams(0)
    with pytest.raises(ConfigurationError):
        ModelParams(1.5)


def test_constrained_rhs_at_e1(b):
    e1 = SpectralField.mode(b, 1)
    assert np.max(np.abs(constrained_rhs(e1, ModelParams(1)).coeffs)) <= 1e-14
    assert np.max(np.abs(drift_strat(e1, ModelParams(1)).coeffs)) <= 1e-14


def test_drift_ito_example(b):
    e1 = SpectralField.mode(b, 1)
    d = drift_ito(e1, ModelParams(1), F(b, b.unit(2))).coeffs
    np.testing.assert_allclose(d, -0.5 * b.unit(1), atol=1e-14)
    zero = F(b, np.zeros(b.size))
    rng = np.random.default_rng(1)
    c = rng.standard_normal(b.size) / np.arange(1, b.size + 1) ** 2
    u = SpectralField(c / np.linalg.norm(c), b)
    assert np.array_equal(drift_ito(u, ModelParams(2), zero).coeffs,
                          drift_strat(u, ModelParams(2)).coeffs)


def test_a_cancellation_and_tangency(b):
    rng = np.random.default_rng(2)
    for _ in range(200):
        c = rng.standard_normal(b.size) / np.arange(1, b.size + 1)
        u = SpectralField(c / np.linalg.norm(c), b)
        for n_exp in (1, 2):
            r0 = constrained_rhs(u, ModelParams(n_exp, 0.0)).coeffs
            r7 = constrained_rhs(u, ModelParams(n_exp, 7.3)).coeffs
            assert np.linalg.norm(r0 - r7) <= 1e-10
            ds = drift_strat(u, ModelParams(n_exp))
            assert np.linalg.norm(r0 - ds.coeffs) <= 1e-10
            assert abs(ds.inner(u)) <= 1e-10


def test_F_odd(b):
    rng = np.random.default_rng(5)
    for _ in range(20):
        u = SpectralField(rng.standard_normal(b.size) / 3, b)
        for n_exp in (1, 2):
            p = ModelParams(n_exp)
            np.testing.assert_allclose(nonlinearity_F(-u, p).coeffs,
                                       -nonlinearity_F(u, p).coeffs, atol=1e-12)


def test_galerkin_rhs(b):
    e1 = SpectralField.mode(b, 1)
    nm = F(b, b.unit(2))
    g = galerkin_rhs(e1, ModelParams(2), nm, 2)
    assert not g.coeffs[2:].any()
    full = drift_ito(e1, ModelParams(2), nm).coeffs
    np.testing.assert_allclose(g.coeffs[:2], full[:2], atol=1e-15)
    assert np.linalg.norm(full[2:]) == pytest.approx(1 / (2 * math.pi), abs=1e-12)
    # noise part is untouched when f_k lives in H_n
    B = noise_field(e1, 1, nm).coeffs
    assert not B[2:].any()
    with pytest.raises(DomainError):
        galerkin_rhs(e1, ModelParams(1), nm, 0)
