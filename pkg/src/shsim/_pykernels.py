"""Pure-numpy time stepping, vectorized over the ensemble axis."""

import numpy as np

from .dynamics import nonlinearity
from .geometry import ito_terms, noise_terms

EULER_ITO, HEUN_STRAT, EXP_EULER_ITO = 0, 1, 2
BLOWUP_NORM = 1e3


def step_batch(prob, c, dt, dW, scheme, renormalize):
    """Advance coefficient rows ``c`` (E, size) by one step of length ``dt``.

    ``dW`` has shape (E, N).  Modes at or beyond ``prob.n_active`` are held at
    zero.
    """
    basis, F, n_exp = prob.basis, prob.F, prob.n_exp
    fu, B = noise_terms(F, c)
    noise = np.einsum("ek,eks->es", dW, B)
    if scheme == EULER_ITO:
        drift = -basis.mu * c + nonlinearity(basis, c, n_exp)
        drift = drift + 0.5 * ito_terms(F, c, fu, B).sum(axis=-2)
        out = c + dt * drift + noise
    elif scheme == HEUN_STRAT:
        d0 = -basis.mu * c + nonlinearity(basis, c, n_exp)
        pred = c + dt * d0 + noise
        pred[:, prob.n_active:] = 0.0
        d1 = -basis.mu * pred + nonlinearity(basis, pred, n_exp)
        _, B1 = noise_terms(F, pred)
        noise1 = np.einsum("ek,eks->es", dW, B1)
        out = c + 0.5 * dt * (d0 + d1) + 0.5 * (noise + noise1)
    elif scheme == EXP_EULER_ITO:
        rest = nonlinearity(basis, c, n_exp) + 0.5 * ito_terms(F, c, fu, B).sum(axis=-2)
        out = np.exp(-dt * basis.mu) * (c + dt * rest + noise)
    else:
        raise ValueError(f"unknown scheme code {scheme}")
    out[:, prob.n_active:] = 0.0
    if renormalize:
        nrm = np.sqrt(np.sum(out * out, axis=-1))
        with np.errstate(divide="ignore", invalid="ignore"):
            out = out / nrm[:, None]
    return out


def record_steps(S, record_every):
    idx = list(range(0, S + 1, record_every))
    if idx[-1] != S:
        idx.append(S)
    return np.array(idx)


def integrate(prob, c0, dW, dts, scheme, renormalize, record_every):
    """Integrate an ensemble.

    Returns ``(records, fail_step)``: ``records`` has shape (E, R, size) at
    the step indices of :func:`record_steps`; ``fail_step[e]`` is the first
    step whose output was non-finite or larger than ``BLOWUP_NORM`` (-1 if
    none).  Failed rows are frozen at their last good state.
    """
    c = np.array(c0, dtype=float)
    E, size = c.shape
    S = dts.shape[0]
    rec_idx = record_steps(S, record_every)
    records = np.empty((E, rec_idx.size, size))
    fail = np.full(E, -1, dtype=np.int64)
    r = 0
    if rec_idx[0] == 0:
        records[:, 0] = c
        r = 1
    alive = np.ones(E, dtype=bool)
    for i in range(S):
        with np.errstate(over="ignore", invalid="ignore"):
            new = step_batch(prob, c, float(dts[i]), dW[:, i, :], scheme, renormalize)
            nrm = np.sqrt(np.sum(new * new, axis=-1))
        bad = alive & ~(np.isfinite(nrm) & (nrm <= BLOWUP_NORM))
        if bad.any():
            fail[bad] = i
            alive &= ~bad
        c = np.where(alive[:, None], new, c)
        if r < rec_idx.size and rec_idx[r] == i + 1:
            records[:, r] = c
            r += 1
    return records, fail
