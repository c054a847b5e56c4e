"""Geometry of the unit L2 sphere: tangent projection, noise fields, Itô correction."""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ConfigurationError, DomainError
from .spectral import SpectralField, sq_norms

SPHERE_TOL = 1e-8


class OffSphereWarning(UserWarning):
    pass


@dataclass(frozen=True, eq=False)
class NoiseModel:
    """Fixed noise directions ``f_1..f_N`` stored as an ``(N, size)`` matrix."""

    directions: np.ndarray
    basis: object

    def __post_init__(self):
        F = np.array(self.directions, dtype=float)
        if F.ndim == 1:
            F = F[None, :]
        if F.ndim != 2 or F.shape[0] < 1:
            raise ConfigurationError("noise needs at least one direction", "N")
        if F.shape[1] != self.basis.size:
            raise ConfigurationError(
                f"noise directions need {self.basis.size} coefficients", "noise"
            )
        if not np.all(np.isfinite(F)):
            raise ConfigurationError("noise directions must be finite", "noise")
        F.setflags(write=False)
        object.__setattr__(self, "directions", F)

    @property
    def N(self):
        return self.directions.shape[0]

    @classmethod
    def from_modes(cls, basis, modes, amplitudes):
        if len(modes) != len(amplitudes):
            raise ConfigurationError("noise modes and amplitudes differ in length", "amplitudes")
        F = np.zeros((len(modes), basis.size))
        for k, (j, a) in enumerate(zip(modes, amplitudes)):
            if not 1 <= j <= basis.size:
                raise ConfigurationError(f"noise mode {j} outside 1..{basis.size}", "modes")
            F[k, j - 1] = a
        return cls(F, basis)

    @classmethod
    def default(cls, basis, N=2):
        """``f_k = e_k / k**2`` for ``k = 1..N``."""
        ks = list(range(1, N + 1))
        return cls.from_modes(basis, ks, [1.0 / k**2 for k in ks])

    def fields(self):
        return [SpectralField(f, self.basis) for f in self.directions]

    def V_norms(self):
        return np.sqrt(sq_norms(self.basis, self.directions)["V"])

    def truncated(self, n):
        """Directions projected onto the first ``n`` modes."""
        F = np.array(self.directions)
        F[:, n:] = 0.0
        return NoiseModel(F, self.basis)

    def to_config(self):
        """Sparse ``{"modes", "amplitudes"}`` form when every direction is a
        single scaled mode, else explicit coefficient lists."""
        nz = [np.flatnonzero(f) for f in self.directions]
        if all(len(ix) <= 1 for ix in nz):
            modes = [int(ix[0]) + 1 if len(ix) else 1 for ix in nz]
            amps = [float(f[m - 1]) for f, m in zip(self.directions, modes)]
            return {"modes": modes, "amplitudes": amps}
        return {"coefficients": [[float(x) for x in f] for f in self.directions]}

    @classmethod
    def from_config(cls, basis, cfg):
        if "coefficients" in cfg:
            return cls(np.array(cfg["coefficients"], dtype=float), basis)
        return cls.from_modes(basis, cfg["modes"], cfg["amplitudes"])


# ---------------------------------------------------------------- array level


def noise_terms(F, c):
    """``B_k(u)`` for every direction: returns ``(<f_k,u>, B)`` with ``B`` of
    shape ``(..., N, size)``."""
    fu = c @ F.T
    B = F - fu[..., :, None] * c[..., None, :]
    return fu, B


def ito_terms(F, c, fu=None, B=None):
    """``m_k(u) = -<f_k, B_k(u)> u - <f_k, u> B_k(u)``, shape ``(..., N, size)``."""
    if B is None:
        fu, B = noise_terms(F, c)
    fB = np.sum(F * B, axis=-1)
    return -fB[..., :, None] * c[..., None, :] - fu[..., :, None] * B


# ---------------------------------------------------------------- field level


def _sphere_check(u):
    dev = abs(u.norm() - 1.0)
    if dev > SPHERE_TOL:
        warnings.warn(
            f"field is off the unit sphere by {dev:.3e}", OffSphereWarning, stacklevel=3
        )


def _same(u, h):
    if u.basis.size != h.basis.size:
        raise DomainError("fields live on different bases")


def project_tangent(u, h):
    """``h - <h, u> u``."""
    _same(u, h)
    _sphere_check(u)
    return SpectralField(h.coeffs - np.dot(h.coeffs, u.coeffs) * u.coeffs, u.basis)


def _direction(noise, k):
    if int(k) != k or not 1 <= k <= noise.N:
        raise DomainError(f"noise index k must lie in 1..{noise.N}, got {k}")
    return noise.directions[int(k) - 1]


def noise_field(u, k, noise):
    """``B_k(u) = f_k - <f_k, u> u``."""
    f = _direction(noise, k)
    _same(u, SpectralField(f, noise.basis))
    c = u.coeffs
    return SpectralField(f - np.dot(f, c) * c, u.basis)


def ito_correction(u, k, noise):
    """``m_k(u)``, the derivative of ``B_k`` at ``u`` in the direction ``B_k(u)``."""
    f = _direction(noise, k)
    c = u.coeffs
    fu = np.dot(f, c)
    B = f - fu * c
    return SpectralField(-np.dot(f, B) * c - fu * B, u.basis)


def assert_on_sphere(u, tol=1e-12):
    """Return ``| |u|^2 - 1 |``; warns (does not raise) above ``tol``."""
    dev = abs(float(np.dot(u.coeffs, u.coeffs)) - 1.0)
    if dev > tol:
        warnings.warn(f"sphere deviation {dev:.3e} exceeds {tol:.1e}", OffSphereWarning, stacklevel=2)
    return dev
