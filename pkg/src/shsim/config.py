"""Structured-text run configuration.

Files are INI-style with the sections ``[domain]``, ``[model]``, ``[noise]``,
``[integrator]`` and ``[suite]``.  Lists are comma separated.  Unknown
sections or keys are rejected, and every default is written back into the
resolved configuration so a manifest records exactly what ran.

Example::

    [domain]
    length = 3.141592653589793
    n_modes = 16

    [integrator]
    T = 1.0
    dt = 1e-3
"""

from __future__ import annotations

import configparser
import hashlib
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .dynamics import ModelParams
from .errors import ConfigurationError
from .geometry import NoiseModel
from .integrator import SCHEMES, SimConfig
from .spectral import build_basis

_FLOAT, _INT, _BOOL, _STR = "float", "int", "bool", "str"
_FLOATS, _INTS = "floats", "ints"

SCHEMA = {
    "domain": {
        "length": _FLOATS,
        "n_modes": _INT,
        "quad_points": _INT,
        "n_galerkin": _INT,
    },
    "model": {
        "n_exp": _INT,
        "a": _FLOAT,
        "u0_modes": _INTS,
        "u0_amplitudes": _FLOATS,
    },
    "noise": {
        "N": _INT,
        "modes": _INTS,
        "amplitudes": _FLOATS,
    },
    "integrator": {
        "T": _FLOAT,
        "dt": _FLOAT,
        "scheme": _STR,
        "renormalize": _BOOL,
        "master_seed": _INT,
        "record_every": _INT,
    },
    "suite": {
        "ensemble": _INT,
        "n_list": _INTS,
        "delta_list": _FLOATS,
        "epsilon": _FLOAT,
        "t1": _FLOAT,
        "t2": _FLOAT,
        "eta": _INTS,
        "h": _STR,
        "trajectory": _INT,
        "chunk": _INT,
    },
}

SUITE_DEFAULTS = {
    "ensemble": 64,
    "n_list": [4, 8, 16],
    "delta_list": [0.05, 0.1, 0.2, 0.4],
    "epsilon": 0.5,
    "t1": 0.75,
    "t2": 0.25,
    "eta": [1, 2],
    "h": "one,norm_sq,proj_e1",
    "trajectory": 0,
    "chunk": 64,
}


def _parse_value(kind, raw, key):
    raw = raw.strip()
    try:
        if kind == _FLOAT:
            return float(raw)
        if kind == _INT:
            v = float(raw)
            if not v.is_integer():
                raise ValueError
            return int(v)
        if kind == _BOOL:
            low = raw.lower()
            if low in ("1", "true", "yes", "on"):
                return True
            if low in ("0", "false", "no", "off"):
                return False
            raise ValueError
        if kind == _FLOATS:
            return [float(x) for x in raw.split(",") if x.strip()]
        if kind == _INTS:
            out = []
            for x in raw.split(","):
                if x.strip():
                    v = float(x)
                    if not v.is_integer():
                        raise ValueError
                    out.append(int(v))
            return out
        return raw
    except ValueError:
        raise ConfigurationError(f"cannot read {key} = {raw!r} as {kind}", key) from None


@dataclass
class RunSpec:
    """A parsed configuration: the simulator config plus suite selections."""

    sim: SimConfig
    suite: dict
    resolved: dict = field(default_factory=dict)

    @property
    def config_hash(self):
        return config_hash(self.resolved)


def parse_config_text(text, seed=None):
    cp = configparser.ConfigParser(interpolation=None, delimiters=("=",),
                                   comment_prefixes=("#", ";"), inline_comment_prefixes=("#",))
    cp.optionxform = str
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        line = getattr(exc, "lineno", None)
        if line is None and getattr(exc, "errors", None):
            line = exc.errors[0][0]
        where = f" (line {line})" if line else ""
        raise ConfigurationError(f"malformed configuration{where}: {exc.message}") from None
    raw = {}
    for section in cp.sections():
        if section not in SCHEMA:
            raise ConfigurationError(f"unknown section [{section}]", section)
        for key, value in cp.items(section):
            kind = SCHEMA[section].get(key)
            if kind is None and section == "noise" and key[:1] == "f" and key[1:].isdigit():
                kind = _FLOATS
            if kind is None:
                raise ConfigurationError(f"unknown key {key!r} in [{section}]", key)
            raw.setdefault(section, {})[key] = _parse_value(kind, value, key)
    return resolve(raw, seed=seed)


def parse_config(path, seed=None):
    """Read a configuration file; ``seed`` overrides ``master_seed``."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigurationError(f"cannot read configuration {path}: {exc}") from None
    return parse_config_text(text, seed=seed)


def resolve(raw, seed=None):
    """Fill defaults and build the simulator objects from a nested dict."""
    dom = dict(raw.get("domain", {}))
    mod = dict(raw.get("model", {}))
    noi = dict(raw.get("noise", {}))
    itg = dict(raw.get("integrator", {}))
    sui = dict(raw.get("suite", {}))

    length = dom.get("length", [math.pi])
    if isinstance(length, (int, float)):
        length = [float(length)]
    if "T" not in itg:
        raise ConfigurationError("T is required", "T")
    if "dt" not in itg:
        raise ConfigurationError("dt is required", "dt")
    n_exp = mod.get("n_exp", 1)
    params = ModelParams(n_exp=n_exp, a=mod.get("a", 1.0))
    n_modes = dom.get("n_modes", 16)
    basis = build_basis(length, n_modes, dom.get("quad_points"), n_exp=params.n_exp)
    n_galerkin = dom.get("n_galerkin", basis.size)

    fk = sorted((k for k in noi if k[:1] == "f" and k[1:].isdigit()), key=lambda k: int(k[1:]))
    if fk:
        if "modes" in noi or "amplitudes" in noi:
            raise ConfigurationError("give either f1..fN or modes/amplitudes, not both", fk[0])
        if [int(k[1:]) for k in fk] != list(range(1, len(fk) + 1)):
            raise ConfigurationError("noise directions must be numbered f1..fN", fk[-1])
        coeffs = []
        for k in fk:
            v = list(noi[k]) + [0.0] * (basis.size - len(noi[k]))
            if len(v) != basis.size:
                raise ConfigurationError(f"{k} has more than {basis.size} coefficients", k)
            coeffs.append(v)
        if "N" in noi and noi["N"] != len(fk):
            raise ConfigurationError("N disagrees with the number of f-lists", "N")
        noise = NoiseModel(np.array(coeffs), basis)
    else:
        N = noi.get("N", len(noi["modes"]) if "modes" in noi else 2)
        if N < 1:
            raise ConfigurationError("N must be at least 1", "N")
        modes = noi.get("modes", list(range(1, N + 1)))
        amps = noi.get("amplitudes", [1.0 / k**2 for k in modes])
        if len(modes) != N:
            raise ConfigurationError("modes must list N entries", "modes")
        noise = NoiseModel.from_modes(basis, modes, amps)

    u0_modes = mod.get("u0_modes", [1])
    u0_amps = mod.get("u0_amplitudes", [1.0] * len(u0_modes))
    if len(u0_modes) != len(u0_amps):
        raise ConfigurationError("u0_modes and u0_amplitudes differ in length", "u0_amplitudes")
    u0 = np.zeros(basis.size)
    for j, a in zip(u0_modes, u0_amps):
        if not 1 <= j <= basis.size:
            raise ConfigurationError(f"u0 mode {j} outside 1..{basis.size}", "u0_modes")
        u0[j - 1] += a

    master_seed = itg.get("master_seed", 0) if seed is None else int(seed)
    scheme = itg.get("scheme", "exp_euler_ito")
    if scheme not in SCHEMES:
        raise ConfigurationError(f"scheme must be one of {', '.join(SCHEMES)}", "scheme")
    sim = SimConfig(
        basis=basis, noise=noise, T=itg["T"], dt=itg["dt"], params=params,
        n_galerkin=n_galerkin, scheme=scheme, renormalize=itg.get("renormalize", True),
        master_seed=master_seed, record_every=itg.get("record_every", 1), u0=u0,
    )
    suite = dict(SUITE_DEFAULTS)
    suite.update(sui)
    if suite["ensemble"] < 2:
        raise ConfigurationError("ensemble must be at least 2", "ensemble")
    if suite["chunk"] < 1:
        raise ConfigurationError("chunk must be positive", "chunk")
    return RunSpec(sim, suite, resolved_dict(sim, suite))


def resolved_dict(sim, suite=None):
    """Fully expanded, JSON-serializable form of a run."""
    b = sim.basis
    nz = np.flatnonzero(sim.u0)
    d = {
        "domain": {
            "length": list(b.lengths),
            "n_modes": b.n_modes,
            "quad_points": b.quad_points,
            "n_galerkin": sim.n_galerkin,
        },
        "model": {
            "n_exp": sim.params.n_exp,
            "a": sim.params.a,
            "u0_modes": [int(j) + 1 for j in nz],
            "u0_amplitudes": [float(sim.u0[j]) for j in nz],
        },
        "noise": {"N": sim.noise.N, **sim.noise.to_config()},
        "integrator": {
            "T": float(sim.T),
            "dt": float(sim.dt),
            "scheme": sim.scheme,
            "renormalize": bool(sim.renormalize),
            "master_seed": int(sim.master_seed),
            "record_every": int(sim.record_every),
        },
    }
    if suite is not None:
        d["suite"] = dict(suite)
    return d


def config_hash(resolved):
    """64-bit content hash, independent of key order."""
    canon = json.dumps(resolved, sort_keys=True, separators=(",", ":"))
    return hashlib.blake2b(canon.encode(), digest_size=8).hexdigest()


def sim_hash(sim):
    return config_hash(resolved_dict(sim))


def to_text(resolved):
    """Write a resolved dict back as configuration text."""
    lines = []
    for section in ("domain", "model", "noise", "integrator", "suite"):
        if section not in resolved:
            continue
        lines.append(f"[{section}]")
        for key, value in resolved[section].items():
            if key == "coefficients":
                for k, row in enumerate(value, 1):
                    lines.append(f"f{k} = " + ", ".join(repr(float(x)) for x in row))
                continue
            if isinstance(value, bool):
                value = "true" if value else "false"
            elif isinstance(value, (list, tuple)):
                value = ", ".join(repr(x) for x in value)
            elif isinstance(value, float):
                value = repr(value)
            lines.append(f"{key} = {value}")
        lines.append("")
    return "\n".join(lines)
