"""Galerkin time integration with reproducible Brownian paths.

Three one-step schemes are available, each with optional renormalization onto
the unit sphere after every step:

``euler_ito``
    ``u + dt * drift_ito(u) + sum_k B_k(u) dW_k``
``heun_strat``
    predictor ``v = u + dt * drift_strat(u) + sum_k B_k(u) dW_k``, then
    ``u + dt/2 (drift_strat(u) + drift_strat(v)) + 1/2 sum_k (B_k(u) + B_k(v)) dW_k``
``exp_euler_ito``
    ``exp(-dt A) (u + dt (F(u) + 1/2 sum_k m_k(u)) + sum_k B_k(u) dW_k)``
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .brownian import sample_brownian, sample_ensemble, step_sizes
from .dynamics import ModelParams, check_dealiasing
from .errors import ConfigurationError, DegenerateInitialCondition, DomainError, IntegrationError
from .geometry import NoiseModel
from .spectral import SpectralField, lp_power, sq_norms

SCHEMES = tuple(kernels.SCHEMES)
EXPLICIT = ("euler_ito", "heun_strat")


class StiffnessWarning(RuntimeWarning):
    """Explicit scheme used with ``dt * mu_max > 2``; the top modes are unstable."""


@dataclass(frozen=True, eq=False)
class SimConfig:
    basis: object
    noise: NoiseModel
    T: float
    dt: float
    params: ModelParams = field(default_factory=ModelParams)
    n_galerkin: int | None = None
    scheme: str = "exp_euler_ito"
    renormalize: bool = True
    master_seed: int = 0
    record_every: int = 1
    u0: np.ndarray | None = None

    def __post_init__(self):
        size = self.basis.size
        n = size if self.n_galerkin is None else self.n_galerkin
        if int(n) != n or not 1 <= n <= size:
            raise ConfigurationError(f"n_galerkin must lie in 1..{size}, got {n}", "n_galerkin")
        object.__setattr__(self, "n_galerkin", int(n))
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ConfigurationError(f"T must be positive, got {self.T}", "T")
        if not (self.dt > 0 and math.isfinite(self.dt)):
            raise ConfigurationError(f"dt must be positive, got {self.dt}", "dt")
        if self.dt > self.T:
            raise ConfigurationError(f"dt={self.dt} exceeds T={self.T}", "dt")
        if self.scheme not in SCHEMES:
            raise ConfigurationError(
                f"scheme must be one of {', '.join(SCHEMES)}, got {self.scheme!r}", "scheme"
            )
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ConfigurationError("record_every must be an integer >= 1", "record_every")
        if not 0 <= int(self.master_seed) < 2**64:
            raise ConfigurationError("master_seed must fit in 64 unsigned bits", "master_seed")
        if self.noise.basis.size != size:
            raise ConfigurationError("noise directions do not match the basis", "noise")
        check_dealiasing(self.basis, self.params.n_exp)
        stiff = self.dt * float(self.basis.mu[self.n_galerkin - 1])
        if self.scheme in EXPLICIT and stiff > 2.0:
            warnings.warn(f"{self.scheme} with dt * mu_max = {stiff:.3g} > 2 is unstable in the "
                          "top modes; reduce dt or n_galerkin, or use exp_euler_ito",
                          StiffnessWarning, stacklevel=3)
        u0 = self.basis.unit(1) if self.u0 is None else np.asarray(self.u0, dtype=float)
        if u0.shape != (size,) or not np.all(np.isfinite(u0)):
            raise ConfigurationError(f"u0 needs {size} finite coefficients", "u0")
        u0 = u0.copy()
        u0.setflags(write=False)
        object.__setattr__(self, "u0", u0)

    @property
    def n_steps(self):
        return step_sizes(self.T, self.dt).size

    def replace(self, **changes):
        kw = {k: getattr(self, k) for k in self.__dataclass_fields__}
        kw.update(changes)
        return SimConfig(**kw)


def initial_condition(u0_raw, n):
    """``Z_n u0 / |Z_n u0|``; raises on a vanishing projection."""
    c = np.array(u0_raw.coeffs if isinstance(u0_raw, SpectralField) else u0_raw, dtype=float)
    basis = u0_raw.basis if isinstance(u0_raw, SpectralField) else None
    if int(n) != n or not 1 <= n <= c.size:
        raise DomainError(f"n must lie in 1..{c.size}, got {n}")
    c[int(n):] = 0.0
    nrm = math.sqrt(float(np.dot(c, c)))
    if nrm == 0.0:
        raise DegenerateInitialCondition(f"initial condition has no component in the first {n} modes")
    c = c / nrm
    return SpectralField(c, basis) if basis is not None else c


def _problem(config, n=None):
    n = config.n_galerkin if n is None else int(n)
    return kernels.KernelProblem(
        config.basis, np.array(config.noise.truncated(n).directions), n, config.params.n_exp
    )


def step(u, dt, dW, config):
    """One step of ``config.scheme`` from the field ``u`` with increments ``dW``."""
    dW = np.asarray(dW, dtype=float).reshape(1, 1, -1)
    if dW.shape[-1] != config.noise.N:
        raise DomainError(f"need {config.noise.N} Brownian increments")
    recs, fail = kernels.integrate(
        _problem(config), u.coeffs[None, :], dW, np.array([float(dt)]),
        config.scheme, config.renormalize, 1, backend="python",
    )
    if fail[0] >= 0:
        raise IntegrationError("state blew up", step=0, time=float(dt))
    return SpectralField(recs[0, -1], u.basis)


def diagnostics(basis, states, n_exp):
    """Per-record diagnostics for coefficient arrays ``(..., size)``."""
    sq = sq_norms(basis, states)
    if n_exp == 1:
        lpn = sq["l2"]
    else:
        lpn = lp_power(basis, states, 2 * n_exp)
    return {
        "sphere_defect": sq["l2"] - 1.0,
        "V_norm_sq": sq["V"],
        "L2n_norm": lpn,
        "DA_norm_sq": sq["DA"],
    }


@dataclass(frozen=True, eq=False)
class Trajectory:
    """Recorded path of one trajectory; Brownian increments are kept."""

    times: np.ndarray
    states: np.ndarray
    dW: np.ndarray
    diagnostics: dict
    basis: object
    trajectory_index: int

    def fields(self):
        return [SpectralField(c, self.basis) for c in self.states]


@dataclass(frozen=True, eq=False)
class Ensemble:
    times: np.ndarray
    states: np.ndarray  # (E, R, size)
    indices: np.ndarray
    fail_step: np.ndarray
    dts: np.ndarray  # step sizes actually taken


def step_times(T, dt):
    """Grid ``t_i = i * dt`` ending exactly at ``T``."""
    S = step_sizes(T, dt).size
    t = np.arange(S + 1) * float(dt)
    t[-1] = float(T)
    return t


def record_times(config):
    t = step_times(config.T, config.dt)
    dts = np.diff(t)
    return t[kernels.record_steps(dts.size, config.record_every)]


def simulate_ensemble(config, indices, n=None, scheme=None, renormalize=None,
                      check=True, backend=None):
    """Integrate trajectories ``indices`` on shared seeds.

    ``n`` overrides the active Galerkin size; all sizes draw the same
    Brownian paths, so runs at different ``n`` are coupled.
    """
    indices = np.atleast_1d(np.asarray(indices, dtype=np.int64))
    n = config.n_galerkin if n is None else int(n)
    scheme = config.scheme if scheme is None else scheme
    renormalize = config.renormalize if renormalize is None else renormalize
    c0 = initial_condition(config.u0, n)
    dW, dts = sample_ensemble(config.T, config.dt, config.noise.N, config.master_seed,
                              [int(i) for i in indices])
    recs, fail = kernels.integrate(
        _problem(config, n), np.repeat(c0[None, :], indices.size, axis=0), dW, dts,
        scheme, renormalize, config.record_every, backend=backend,
    )
    if check and np.any(fail >= 0):
        e = int(np.flatnonzero(fail >= 0)[0])
        s = int(fail[e])
        raise IntegrationError(
            f"trajectory {int(indices[e])} left the stable region at step {s}",
            step=s, time=float(step_times(config.T, config.dt)[s + 1]), trajectory=int(indices[e]),
        )
    return Ensemble(record_times(config), recs, indices, fail, dts)


def simulate(config, trajectory_index=0, backend=None):
    """One trajectory with its diagnostics."""
    ens = simulate_ensemble(config, [trajectory_index], backend=backend)
    path = sample_brownian(config.T, config.dt, config.noise.N, config.master_seed,
                           trajectory_index)
    states = ens.states[0]
    return Trajectory(ens.times, states, path.dW,
                      diagnostics(config.basis, states, config.params.n_exp),
                      config.basis, int(trajectory_index))
