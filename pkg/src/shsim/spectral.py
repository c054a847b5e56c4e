"""Dirichlet-Laplacian eigenbasis on an interval or rectangle.

Fields are stored as coefficient vectors against the orthonormal sine basis
``e_j``.  The basis diagonalizes the Laplacian (eigenvalues ``lam``) and the
operator ``A = Δ² - 2Δ`` (eigenvalues ``mu = lam**2 + 2*lam``), so linear
operators act coefficientwise.  Pointwise operations go through a uniform
interior collocation grid with the type-I discrete sine transform.

Array-level helpers (``synthesize``, ``analyze``, ``sq_norms`` ...) accept
coefficient arrays with arbitrary leading batch dimensions; the public
field-level API wraps single :class:`SpectralField` values.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from numbers import Real

import numpy as np
from scipy import fft as spfft

from .errors import ConfigurationError, DomainError

__all__ = [
    "BasisSpec",
    "SpectralField",
    "GridField",
    "build_basis",
    "dealias_min_points",
    "to_grid",
    "from_grid",
    "norms",
    "project_Zn",
    "apply_A",
    "apply_semigroup",
]


def dealias_min_points(n_modes, n_exp=1):
    """Smallest per-axis collocation count that resolves ``u**(2*n_exp-1)``."""
    return (2 * n_exp + 1) * n_modes


@dataclass(frozen=True, eq=False)
class BasisSpec:
    lengths: tuple
    n_modes: int
    quad_points: int
    modes: np.ndarray
    lam: np.ndarray
    mu: np.ndarray

    @property
    def dim(self):
        return len(self.lengths)

    @property
    def size(self):
        return self.lam.shape[0]

    @property
    def grid_shape(self):
        return (self.quad_points,) * self.dim

    @property
    def weight(self):
        """Quadrature weight of one grid cell (product of node spacings)."""
        return math.prod(L / (self.quad_points + 1) for L in self.lengths)

    def nodes(self):
        M = self.quad_points
        return tuple(L * np.arange(1, M + 1) / (M + 1) for L in self.lengths)

    @cached_property
    def _scale(self):
        # one factor sqrt(2/L)/2 per axis: maps DST-I output to e_j values
        return math.prod(math.sqrt(2.0 / L) / 2.0 for L in self.lengths)

    @cached_property
    def synthesis_matrix(self):
        """Dense ``(G, size)`` matrix of basis values at the grid nodes."""
        cols = []
        nodes = self.nodes()
        for mode in self.modes:
            col = None
            for axis, j in enumerate(mode):
                L = self.lengths[axis]
                v = math.sqrt(2.0 / L) * np.sin(j * math.pi * nodes[axis] / L)
                col = v if col is None else np.multiply.outer(col, v)
            cols.append(np.ravel(col))
        return np.ascontiguousarray(np.array(cols).T)

    @cached_property
    def analysis_matrix(self):
        """Dense ``(size, G)`` quadrature projection onto the basis."""
        return np.ascontiguousarray(self.weight * self.synthesis_matrix.T)

    def unit(self, j, amplitude=1.0):
        """Coefficient vector of ``amplitude * e_j`` (1-based ``j``)."""
        if not 1 <= j <= self.size:
            raise DomainError(f"mode index {j} outside 1..{self.size}")
        c = np.zeros(self.size)
        c[j - 1] = amplitude
        return c


def build_basis(lengths, n_modes, quad_points=None, n_exp=1):
    """Build the sine basis on ``(0, L)`` or ``(0, L1) x (0, L2)``.

    Parameters
    ----------
    lengths : float or sequence of one or two floats
        Side lengths of the interval or rectangle.
    n_modes : int
        Modes per axis.  In 2-D the basis has ``n_modes**2`` elements, sorted
        by Laplacian eigenvalue with a lexicographic tie-break on the mode
        indices.
    quad_points : int, optional
        Collocation points per axis; defaults to ``4 * n_modes * n_exp``.
    n_exp : int
        Exponent of the power nonlinearity the grid must de-alias.
    """
    if isinstance(lengths, Real):
        lengths = (float(lengths),)
    lengths = tuple(float(L) for L in lengths)
    if len(lengths) not in (1, 2):
        raise ConfigurationError("domain must be an interval or a rectangle", "length")
    if any(not (L > 0 and math.isfinite(L)) for L in lengths):
        raise ConfigurationError(f"domain lengths must be positive, got {lengths}", "length")
    if int(n_modes) != n_modes or n_modes < 1:
        raise ConfigurationError(f"n_modes must be a positive integer, got {n_modes}", "n_modes")
    n_modes = int(n_modes)
    if quad_points is None:
        quad_points = 4 * n_modes * n_exp
    if int(quad_points) != quad_points or quad_points < 1:
        raise ConfigurationError("quad_points must be a positive integer", "quad_points")
    quad_points = int(quad_points)
    need = dealias_min_points(n_modes, n_exp)
    if quad_points < need:
        raise ConfigurationError(
            f"quad_points={quad_points} below the de-aliasing bound {need} "
            f"for n_modes={n_modes}, n_exp={n_exp}",
            "quad_points",
        )

    wavenumbers = [math.pi / L for L in lengths]
    j = np.arange(1, n_modes + 1)
    if len(lengths) == 1:
        modes = j[:, None]
        lam = (j * wavenumbers[0]) ** 2
    else:
        a, b = np.meshgrid(j, j, indexing="ij")
        a, b = a.ravel(), b.ravel()
        lam = (a * wavenumbers[0]) ** 2 + (b * wavenumbers[1]) ** 2
        # round the sort key so analytically equal eigenvalues tie exactly
        key = np.round(lam, 10)
        order = np.lexsort((b, a, key))
        modes = np.stack([a[order], b[order]], axis=1)
        lam = lam[order]
    lam = np.asarray(lam, dtype=float)
    mu = lam * lam + 2.0 * lam
    for arr in (modes, lam, mu):
        arr.setflags(write=False)
    return BasisSpec(lengths, n_modes, quad_points, modes, lam, mu)


# ---------------------------------------------------------------- array level


def synthesize(basis, coeffs):
    """Grid values of coefficient arrays, shape ``(..., *grid_shape)``."""
    coeffs = np.asarray(coeffs, dtype=float)
    M = basis.quad_points
    lead = coeffs.shape[:-1]
    if basis.dim == 1:
        padded = np.zeros(lead + (M,))
        padded[..., : basis.size] = coeffs
        return basis._scale * spfft.dst(padded, type=1, axis=-1)
    padded = np.zeros(lead + (M, M))
    idx = basis.modes - 1
    padded[..., idx[:, 0], idx[:, 1]] = coeffs
    return basis._scale * spfft.dstn(padded, type=1, axes=(-2, -1))


def analyze(basis, values):
    """Quadrature projection of grid values onto the basis, ``(..., size)``."""
    values = np.asarray(values, dtype=float)
    s = basis.weight * basis._scale
    if basis.dim == 1:
        return s * spfft.dst(values, type=1, axis=-1)[..., : basis.size]
    full = spfft.dstn(values, type=1, axes=(-2, -1))
    idx = basis.modes - 1
    return s * full[..., idx[:, 0], idx[:, 1]]


def inner(a, b):
    """L2 inner product of coefficient arrays along the last axis."""
    return np.sum(a * b, axis=-1)


def sq_norms(basis, coeffs):
    """Squared spectral norms of coefficient arrays.

    Returns a dict with ``l2``, ``h1``, ``h2``, ``V``, ``AV`` (squared V-norm
    of ``A u``) and ``DA`` entries.
    """
    c2 = np.asarray(coeffs) ** 2
    lam, mu = basis.lam, basis.mu
    l2 = c2.sum(axis=-1)
    h1 = (lam * c2).sum(axis=-1)
    h2 = (lam * lam * c2).sum(axis=-1)
    V = l2 + h2
    AV = (mu * mu * (1.0 + lam * lam) * c2).sum(axis=-1)
    return {"l2": l2, "h1": h1, "h2": h2, "V": V, "AV": AV, "DA": V + AV}


def lp_power(basis, coeffs, p):
    """``int |u|**p`` by grid quadrature (exact for even ``p`` within the bound)."""
    if p < 1:
        raise DomainError(f"L^p needs p >= 1, got {p}")
    g = synthesize(basis, coeffs)
    axes = tuple(range(-basis.dim, 0))
    if float(p).is_integer() and int(p) % 2 == 0:
        integrand = g ** int(p)
    else:
        integrand = np.abs(g) ** p
    return basis.weight * integrand.sum(axis=axes)


# ---------------------------------------------------------------- field level


@dataclass(frozen=True, eq=False)
class SpectralField:
    """A field as coefficients against the basis; immutable."""

    coeffs: np.ndarray
    basis: BasisSpec

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=float).reshape(-1)
        if c.shape != (self.basis.size,):
            raise DomainError(
                f"expected {self.basis.size} coefficients, got {c.shape[0]}"
            )
        if not np.all(np.isfinite(c)):
            raise DomainError("field coefficients must be finite")
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, basis):
        return cls(np.zeros(basis.size), basis)

    @classmethod
    def mode(cls, basis, j, amplitude=1.0):
        """``amplitude * e_j`` for 1-based ``j``."""
        return cls(basis.unit(j, amplitude), basis)

    def _check(self, other):
        if not isinstance(other, SpectralField):
            return NotImplemented
        if other.basis is not self.basis and other.basis.size != self.basis.size:
            raise DomainError("fields live on different bases")
        return other

    def __add__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return SpectralField(self.coeffs + other.coeffs, self.basis)

    def __sub__(self, other):
        other = self._check(other)
        if other is NotImplemented:
            return other
        return SpectralField(self.coeffs - other.coeffs, self.basis)

    def __mul__(self, s):
        if not isinstance(s, Real):
            return NotImplemented
        return SpectralField(self.coeffs * float(s), self.basis)

    __rmul__ = __mul__

    def __truediv__(self, s):
        if not isinstance(s, Real):
            return NotImplemented
        return SpectralField(self.coeffs / float(s), self.basis)

    def __neg__(self):
        return SpectralField(-self.coeffs, self.basis)

    def inner(self, other):
        self._check(other)
        return float(inner(self.coeffs, other.coeffs))

    def norm(self):
        """L2 norm (Euclidean norm of the coefficients)."""
        return float(math.sqrt(inner(self.coeffs, self.coeffs)))


@dataclass(frozen=True, eq=False)
class GridField:
    values: np.ndarray
    basis: BasisSpec

    def __post_init__(self):
        v = np.array(self.values, dtype=float)
        if v.shape != self.basis.grid_shape:
            raise DomainError(
                f"grid field needs shape {self.basis.grid_shape}, got {v.shape}"
            )
        v.setflags(write=False)
        object.__setattr__(self, "values", v)


def to_grid(u):
    return GridField(synthesize(u.basis, u.coeffs), u.basis)


def from_grid(g):
    return SpectralField(analyze(g.basis, g.values), g.basis)


def norms(u, p=None):
    """All norms of ``u`` (not squared).

    Keys: ``l2``, ``h1``, ``h2``, ``V``, ``DA``, ``Au_l2``, ``Au_V`` and, when
    ``p`` is given, ``Lp`` (the L^p norm by grid quadrature).
    """
    sq = sq_norms(u.basis, u.coeffs)
    out = {k: float(math.sqrt(sq[k])) for k in ("l2", "h1", "h2", "V", "DA")}
    Au = u.basis.mu * u.coeffs
    out["Au_l2"] = float(math.sqrt(inner(Au, Au)))
    out["Au_V"] = float(math.sqrt(sq["AV"]))
    if p is not None:
        out["Lp"] = float(lp_power(u.basis, u.coeffs, p)) ** (1.0 / p)
    return out


def project_Zn(u, n):
    """Orthogonal projection onto the span of the first ``n`` modes."""
    if int(n) != n or not 1 <= n <= u.basis.size:
        raise DomainError(f"n must lie in 1..{u.basis.size}, got {n}")
    c = np.array(u.coeffs)
    c[int(n):] = 0.0
    return SpectralField(c, u.basis)


def apply_A(u):
    return SpectralField(u.basis.mu * u.coeffs, u.basis)


def apply_semigroup(u, t):
    """``exp(-t A) u``."""
    if t < 0:
        raise DomainError(f"semigroup time must be non-negative, got {t}")
    return SpectralField(np.exp(-t * u.basis.mu) * u.coeffs, u.basis)
