"""Binary coefficient snapshots.

Layout (little-endian): a 32-byte header ``b"SHCS"``, format version (u32),
spatial dimension (u32), modes per axis (u32), two domain lengths (f64; the
second is 0.0 on an interval), followed by one or more rows of ``float64``
coefficients, each row of length ``n_modes**dimension``.
"""

import struct

import numpy as np

from .spectral import build_basis

MAGIC = b"SHCS"
VERSION = 1
_HEADER = struct.Struct("<4sIIIdd")


def write_snapshot(path, basis, coeffs):
    """Write one coefficient vector or a stack of them to ``path``."""
    rows = np.atleast_2d(np.asarray(coeffs, dtype="<f8"))
    if rows.shape[-1] != basis.size:
        raise ValueError(f"rows must have {basis.size} coefficients")
    L1 = basis.lengths[0]
    L2 = basis.lengths[1] if basis.dim == 2 else 0.0
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(MAGIC, VERSION, basis.dim, basis.n_modes, L1, L2))
        fh.write(np.ascontiguousarray(rows).tobytes())


def read_snapshot(path):
    """Return ``(header, rows)``; ``rows`` has shape ``(count, size)``."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _HEADER.size:
        raise ValueError("snapshot shorter than its header")
    magic, version, dim, n_modes, L1, L2 = _HEADER.unpack_from(raw)
    if magic != MAGIC:
        raise ValueError(f"bad snapshot magic {magic!r}")
    if version != VERSION:
        raise ValueError(f"unsupported snapshot version {version}")
    if dim not in (1, 2):
        raise ValueError(f"bad snapshot dimension {dim}")
    size = n_modes**dim
    body = raw[_HEADER.size:]
    if len(body) % (8 * size):
        raise ValueError("snapshot body is not a whole number of rows")
    rows = np.frombuffer(body, dtype="<f8").reshape(-1, size).astype(float)
    header = {
        "version": version,
        "dimension": dim,
        "n_modes": n_modes,
        "lengths": (L1,) if dim == 1 else (L1, L2),
    }
    return header, rows


def basis_from_header(header, quad_points=None, n_exp=1):
    return build_basis(header["lengths"], header["n_modes"], quad_points, n_exp)
