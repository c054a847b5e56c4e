"""Backend selection for the ensemble time-stepping loop.

The compiled extension ``shsim._core`` is used when it imports; otherwise the
numpy implementation in ``shsim._pykernels`` runs.  Setting the environment
variable ``SHSIM_BACKEND=python`` forces the numpy path.
"""

import os
from dataclasses import dataclass

import numpy as np

from . import _pykernels
from ._pykernels import BLOWUP_NORM, EULER_ITO, EXP_EULER_ITO, HEUN_STRAT, record_steps

SCHEMES = {"euler_ito": EULER_ITO, "heun_strat": HEUN_STRAT, "exp_euler_ito": EXP_EULER_ITO}

try:
    if os.environ.get("SHSIM_BACKEND", "").lower() == "python":
        raise ImportError("numpy backend requested")
    from . import _core
except ImportError:
    _core = None

BACKEND = "compiled" if _core is not None else "python"


@dataclass(frozen=True, eq=False)
class KernelProblem:
    """Everything the stepping loop needs, with noise already truncated."""

    basis: object
    F: np.ndarray
    n_active: int
    n_exp: int


def integrate(prob, c0, dW, dts, scheme, renormalize, record_every, backend=None):
    """Integrate an ensemble; see :func:`shsim._pykernels.integrate`.

    Parameters
    ----------
    prob : KernelProblem
    c0 : ndarray (E, size)
    dW : ndarray (E, steps, N)
    dts : ndarray (steps,)
    scheme : str or int
    backend : {"compiled", "python"}, optional
        Defaults to the import-time choice.
    """
    code = SCHEMES[scheme] if isinstance(scheme, str) else int(scheme)
    backend = backend or BACKEND
    c0 = np.ascontiguousarray(c0, dtype=float)
    dW = np.ascontiguousarray(dW, dtype=float)
    dts = np.ascontiguousarray(dts, dtype=float)
    if backend == "python":
        return _pykernels.integrate(prob, c0, dW, dts, code, renormalize, record_every)
    if _core is None:
        raise RuntimeError("compiled backend is not available")
    basis = prob.basis
    if prob.n_exp == 1:
        S = np.zeros((0, basis.size))
        Aa = np.zeros((basis.size, 0))
    else:
        S, Aa = basis.synthesis_matrix, basis.analysis_matrix
    rec = record_steps(dts.size, record_every).astype(np.int_)
    return _core.integrate(
        np.ascontiguousarray(basis.mu), np.ascontiguousarray(basis.lam),
        np.ascontiguousarray(prob.F, dtype=float), int(prob.n_active), int(prob.n_exp),
        S, Aa, float(basis.weight), c0, dW, dts, code, bool(renormalize), rec,
        BLOWUP_NORM,
    )
