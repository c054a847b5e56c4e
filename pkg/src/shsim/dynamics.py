"""Nonlinearity, constrained right-hand side and the Itô/Stratonovich drifts.

For a field ``u`` with exponent ``n`` (``n_exp``) the nonlinearity is

    F(u) = |u|_{H2}^2 u + 2 |u|_{H1}^2 u + |u|_{L^2n}^{2n} u - u^(2n-1)

and on the unit sphere ``-A u + F(u)`` coincides with the tangent projection
of ``-A u - a u - u^(2n-1)`` for every ``a``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .geometry import ito_terms, project_tangent
from .spectral import (
    SpectralField,
    analyze,
    dealias_min_points,
    sq_norms,
    synthesize,
)


@dataclass(frozen=True)
class ModelParams:
    n_exp: int = 1
    a: float = 1.0

    def __post_init__(self):
        if int(self.n_exp) != self.n_exp or self.n_exp < 1:
            raise ConfigurationError(f"n_exp must be an integer >= 1, got {self.n_exp}", "n_exp")
        object.__setattr__(self, "n_exp", int(self.n_exp))
        object.__setattr__(self, "a", float(self.a))


def check_dealiasing(basis, n_exp):
    need = dealias_min_points(basis.n_modes, n_exp)
    if basis.quad_points < need:
        raise ConfigurationError(
            f"quad_points={basis.quad_points} cannot de-alias u^{2 * n_exp - 1} "
            f"with {basis.n_modes} modes (need >= {need})",
            "quad_points",
        )


# ---------------------------------------------------------------- array level


def power_terms(basis, c, n_exp):
    """``(int u^(2n), coefficients of u^(2n-1))`` for coefficient arrays.

    The linear case stays spectral so mode support is preserved exactly.
    """
    if n_exp == 1:
        return np.sum(c * c, axis=-1), c
    g = synthesize(basis, c)
    gp = g ** (2 * n_exp - 1)
    axes = tuple(range(-basis.dim, 0))
    lpn = basis.weight * np.sum(gp * g, axis=axes)
    return lpn, analyze(basis, gp)


def nonlinearity(basis, c, n_exp):
    sq = sq_norms(basis, c)
    lpn, pw = power_terms(basis, c, n_exp)
    return (sq["h2"] + 2.0 * sq["h1"] + lpn)[..., None] * c - pw


def drift_strat_arr(basis, c, n_exp):
    return -basis.mu * c + nonlinearity(basis, c, n_exp)


def drift_ito_arr(basis, F, c, n_exp):
    return drift_strat_arr(basis, c, n_exp) + 0.5 * ito_terms(F, c).sum(axis=-2)


# ---------------------------------------------------------------- field level


def nonlinearity_F(u, params):
    check_dealiasing(u.basis, params.n_exp)
    return SpectralField(nonlinearity(u.basis, u.coeffs, params.n_exp), u.basis)


def constrained_rhs(u, params):
    """Tangent projection of ``-A u - a u - u^(2n-1)``, evaluated directly."""
    basis = u.basis
    check_dealiasing(basis, params.n_exp)
    _, pw = power_terms(basis, u.coeffs, params.n_exp)
    h = -basis.mu * u.coeffs - params.a * u.coeffs - pw
    return project_tangent(u, SpectralField(h, basis))


def drift_strat(u, params):
    """``-A u + F(u)``."""
    check_dealiasing(u.basis, params.n_exp)
    return SpectralField(drift_strat_arr(u.basis, u.coeffs, params.n_exp), u.basis)


def drift_ito(u, params, noise):
    """Stratonovich drift plus half the summed Itô corrections."""
    check_dealiasing(u.basis, params.n_exp)
    return SpectralField(
        drift_ito_arr(u.basis, noise.directions, u.coeffs, params.n_exp), u.basis
    )


def galerkin_rhs(u_n, params, noise, n):
    """Itô drift of the ``n``-mode Galerkin system at ``u_n``.

    The noise directions are projected onto the first ``n`` modes before use,
    which is what the projected Stratonovich system converts to in Itô form;
    for directions already inside the span this equals ``Z_n`` applied to the
    full Itô drift.
    """
    basis = u_n.basis
    if int(n) != n or not 1 <= n <= basis.size:
        raise DomainError(f"n must lie in 1..{basis.size}, got {n}")
    check_dealiasing(basis, params.n_exp)
    F = noise.truncated(int(n)).directions
    d = drift_ito_arr(basis, F, u_n.coeffs, params.n_exp)
    d[int(n):] = 0.0
    return SpectralField(d, basis)
