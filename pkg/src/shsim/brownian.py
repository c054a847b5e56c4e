"""Reproducible, refinement-consistent Brownian increments.

Every increment is a deterministic function of ``(master_seed,
trajectory_index, k, level, position)``.  Normal variates come from the
Philox4x64-10 counter-based generator in numpy (raw 64-bit stream, which numpy
keeps bit-stable across releases): the key is ``(master_seed,
trajectory_index)`` and the counter is ``(0, k, level, 0)``.  The top 53 bits
of each raw word give a uniform in (0, 1) that is mapped through the inverse
normal CDF (``scipy.special.ndtri``).

Paths are built by dyadic Brownian-bridge refinement from a single root
increment over ``[0, H]`` with ``H = dt * 2**level >= T``.  Step sizes that
differ by a power of two share ``H`` and therefore the whole tree: the two
halves of every increment at step ``dt / 2`` sum to the increment at step
``dt`` (up to one rounding).

Stream format version: 1.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import ndtri

STREAM_VERSION = 1
_MASK64 = (1 << 64) - 1


def n_steps(T, dt):
    return max(1, math.ceil(T / dt - 1e-9))


def tree_level(T, dt):
    """Smallest ``level`` with ``dt * 2**level >= T``."""
    level = 0
    while dt * 2.0**level < T * (1.0 - 1e-12):
        level += 1
    return level


def _normals(master_seed, trajectory_index, k, level, count, slot=0):
    key = np.array([master_seed & _MASK64, trajectory_index & _MASK64], dtype=np.uint64)
    counter = np.array([0, k, level, slot], dtype=np.uint64)
    bits = np.random.Philox(key=key, counter=counter).random_raw(count)
    u = ((bits >> np.uint64(11)).astype(np.float64) + 0.5) * 2.0**-53
    return ndtri(u)


def _tree_increments(master_seed, trajectory_index, k, H, level):
    D = np.array([math.sqrt(H) * _normals(master_seed, trajectory_index, k, 0, 1)[0]])
    h = H
    for lev in range(1, level + 1):
        Z = _normals(master_seed, trajectory_index, k, lev, D.size)
        left = 0.5 * D + 0.5 * math.sqrt(h) * Z
        right = D - left
        D = np.empty(2 * D.size)
        D[0::2] = left
        D[1::2] = right
        h *= 0.5
    return D


@dataclass(frozen=True, eq=False)
class BrownianPath:
    """Increments ``dW[step, k]`` on the grid ``t_i = i * dt`` (last step may be
    shorter so the grid ends at ``T``)."""

    dW: np.ndarray
    dts: np.ndarray
    dt: float
    T: float
    master_seed: int
    trajectory_index: int

    @property
    def N(self):
        return self.dW.shape[1]

    @property
    def times(self):
        t = np.arange(self.dts.size + 1) * self.dt
        t[-1] = self.T
        return t


def step_sizes(T, dt):
    S = n_steps(T, dt)
    dts = np.full(S, float(dt))
    last = T - (S - 1) * dt
    if last < dt * (1 - 1e-9):
        dts[-1] = last
    return dts


def sample_brownian(T, dt, N, master_seed, trajectory_index):
    """Brownian increments for one trajectory, shape ``(steps, N)``."""
    if not dt > 0 or not T > 0:
        raise ValueError("T and dt must be positive")
    dts = step_sizes(T, dt)
    S = dts.size
    level = tree_level(T, dt)
    H = dt * 2.0**level
    dW = np.empty((S, N))
    for k in range(N):
        incs = _tree_increments(master_seed, trajectory_index, k, H, level)[:S].copy()
        if dts[-1] != dt:
            # bridge sample of the partial final step inside the last full one
            tau = dts[-1]
            z = _normals(master_seed, trajectory_index, k, level, 1, slot=1)[0]
            incs[-1] = incs[-1] * (tau / dt) + math.sqrt(tau * (dt - tau) / dt) * z
        dW[:, k] = incs
    return BrownianPath(dW, dts, float(dt), float(T), int(master_seed), int(trajectory_index))


def sample_ensemble(T, dt, N, master_seed, indices):
    """Stacked increments ``(len(indices), steps, N)`` and the step sizes."""
    paths = [sample_brownian(T, dt, N, master_seed, i) for i in indices]
    return np.stack([p.dW for p in paths]), paths[0].dts
