"""Monte Carlo and deterministic checks on the Galerkin system.

Every Monte Carlo function returns :class:`EstimateReport` objects whose rows
carry a mean, its standard error and the ensemble size.  All randomness comes
from the configuration's master seed, so reports are reproducible.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import linprog

from .config import sim_hash
from .dynamics import (
    ModelParams,
    constrained_rhs,
    drift_ito_arr,
    drift_strat,
    nonlinearity,
)
from .errors import ConfigurationError, DomainError
from .geometry import ito_terms, noise_terms
from .integrator import diagnostics, record_times, simulate_ensemble
from .spectral import SpectralField, build_basis, sq_norms

PASS, FAIL, REPORT = "pass", "fail", "report-only"
H_FUNCTIONALS = ("one", "norm_sq", "proj_e1")


@dataclass
class EstimateReport:
    """Named statistic with one row per ``n`` (or ``dt``, ``delta``...) point.

    Each row is a dict with at least ``n``, ``value``, ``se`` and
    ``ensemble``; a row may carry its own ``key`` to refine the report key.
    """

    key: str
    rows: list
    verdict: str
    config_hash: str = ""
    seed: int = 0
    details: dict = field(default_factory=dict)

    @property
    def passed(self):
        return self.verdict != FAIL

    def records(self):
        out = []
        for row in self.rows:
            out.append({
                "key": row.get("key", self.key),
                "n": row.get("n"),
                "value": _num(row.get("value")),
                "se": _num(row.get("se")),
                "ensemble": int(row.get("ensemble", 0)),
                "verdict": self.verdict,
                "config_hash": self.config_hash,
                "seed": int(self.seed),
            })
        return out


def _num(x):
    if x is None:
        return None
    x = float(x)
    return x if math.isfinite(x) else None


def mean_se(x):
    """Sample mean and its standard error (ddof=1)."""
    x = np.asarray(x, dtype=float)
    if x.size < 2:
        raise ConfigurationError("an ensemble needs at least two members", "ensemble")
    return float(x.mean()), float(x.std(ddof=1) / math.sqrt(x.size))


def observed_order(steps, errors):
    """Least-squares slope of ``log(error)`` against ``log(step)``."""
    e = np.asarray(errors, dtype=float)
    if np.any(e <= 0) or not np.all(np.isfinite(e)):
        return float("nan")
    return float(np.polyfit(np.log(steps), np.log(e), 1)[0])


def trend_verdict(ns, values, ses):
    """No significant growth in ``n``.

    Passes when the OLS slope of value against ``log n`` lies within two
    propagated standard errors of zero, or when every value is within a
    factor two of the median.
    """
    x = np.log(np.asarray(ns, dtype=float))
    y = np.asarray(values, dtype=float)
    s = np.asarray(ses, dtype=float)
    if y.size < 2:
        return REPORT, float("nan"), float("nan")
    xc = x - x.mean()
    sxx = float(np.sum(xc * xc))
    slope = float(np.sum(xc * (y - y.mean())) / sxx)
    slope_se = float(math.sqrt(np.sum(xc * xc * s * s)) / sxx)
    med = float(np.median(y))
    within = med > 0 and bool(np.all((y <= 2 * med) & (y >= med / 2)))
    ok = abs(slope) <= 2 * slope_se + 1e-12 * max(1.0, abs(med)) or within
    return (PASS if ok else FAIL), slope, slope_se


def _meta(config):
    return sim_hash(config), int(config.master_seed)


def _chunks(ensemble, chunk):
    for start in range(0, ensemble, chunk):
        yield np.arange(start, min(start + chunk, ensemble))


def galerkin_drift(config, n, c):
    """Itô drift of the ``n``-mode system for coefficient arrays ``c``."""
    F = np.array(config.noise.truncated(n).directions)
    d = drift_ito_arr(config.basis, F, c, config.params.n_exp)
    d[..., n:] = 0.0
    return d


# ------------------------------------------------------------ energy bounds


def energy_estimates(config, n_list, ensemble, chunk=64):
    """Monte Carlo estimates of the three energy functionals for each ``n``.

    ``K1 = E sup_t |u|_V^2``, ``K2 = E sup_t |u|_{L^2n}^{2n}`` and
    ``K3 = E int_0^T |u|_{D(A)}^2 dt`` (left Riemann sum on the recorded
    grid).
    """
    if ensemble < 32:
        raise ConfigurationError("energy estimates need an ensemble of at least 32", "ensemble")
    h, seed = _meta(config)
    t = record_times(config)
    w = np.diff(t)
    per = {"K1": [], "K2": [], "K3": []}
    for n in n_list:
        vals = {"K1": [], "K2": [], "K3": []}
        for idx in _chunks(ensemble, chunk):
            ens = simulate_ensemble(config, idx, n=n)
            dg = diagnostics(config.basis, ens.states, config.params.n_exp)
            vals["K1"].append(dg["V_norm_sq"].max(axis=1))
            vals["K2"].append(dg["L2n_norm"].max(axis=1))
            vals["K3"].append(dg["DA_norm_sq"][:, :-1] @ w)
        for k in per:
            m, s = mean_se(np.concatenate(vals[k]))
            per[k].append({"n": int(n), "value": m, "se": s, "ensemble": int(ensemble)})
    reports = []
    names = {"K1": "energy-K1", "K2": "energy-K2", "K3": "energy-K3"}
    for k, rows in per.items():
        verdict, slope, slope_se = trend_verdict(
            [r["n"] for r in rows], [r["value"] for r in rows], [r["se"] for r in rows]
        )
        reports.append(EstimateReport(names[k], rows, verdict, h, seed,
                                      {"slope": slope, "slope_se": slope_se}))
    return reports


# ------------------------------------------------------------ path regularity


def modulus_of_continuity(times, states, delta):
    """``sup_{|t-s| <= delta} |u(t) - u(s)|`` per trajectory.

    ``states`` has shape ``(E, R, size)`` on the grid ``times``.
    """
    times = np.asarray(times)
    tol = 1e-9 * max(1.0, float(times[-1]))
    best = np.zeros(states.shape[0])
    for lag in range(1, times.size):
        ok = (times[lag:] - times[:-lag]) <= delta + tol
        if not ok.any():
            break
        d = states[:, lag:][:, ok] - states[:, :-lag][:, ok]
        best = np.maximum(best, np.sqrt(np.max(np.sum(d * d, axis=-1), axis=1)))
    return best


def aldous_statistic(config, n_list, delta_list, eps, ensemble, chunk=64):
    """Estimate ``P(m(u_n, delta) > eps)`` for every ``n`` and ``delta``.

    Passes when the supremum over ``n`` is non-increasing as ``delta``
    shrinks, up to two standard errors.
    """
    delta_list = [float(d) for d in delta_list]
    if any(b <= a for a, b in zip(delta_list, delta_list[1:])):
        raise DomainError("delta_list must be strictly increasing")
    t = record_times(config)
    spacing = float(np.min(np.diff(t)))
    for d in delta_list:
        if d < spacing * (1 - 1e-9):
            raise DomainError(f"delta={d} is below the recorded grid spacing {spacing}")
        if d > config.T * (1 + 1e-12):
            raise DomainError(f"delta={d} exceeds T={config.T}")
    h, seed = _meta(config)
    hits = {(n, d): [] for n in n_list for d in delta_list}
    for n in n_list:
        for idx in _chunks(ensemble, chunk):
            ens = simulate_ensemble(config, idx, n=n)
            for d in delta_list:
                hits[(n, d)].append(modulus_of_continuity(t, ens.states, d) > eps)
    rows, sups = [], []
    for d in delta_list:
        best = None
        for n in n_list:
            x = np.concatenate(hits[(n, d)]).astype(float)
            p = float(x.mean())
            se = math.sqrt(p * (1 - p) / x.size)
            rows.append({"key": f"aldous:delta={d:g}", "n": int(n), "value": p, "se": se,
                         "ensemble": int(x.size)})
            if best is None or p > best[0]:
                best = (p, se)
        sups.append(best)
        rows.append({"key": f"aldous-sup:delta={d:g}", "n": None, "value": best[0],
                     "se": best[1], "ensemble": int(ensemble)})
    ok = all(
        lo[0] <= hi[0] + 2 * math.hypot(lo[1], hi[1]) for lo, hi in zip(sups, sups[1:])
    )
    return EstimateReport("aldous", rows, PASS if ok else FAIL, h, seed,
                          {"epsilon": float(eps), "sup": [s[0] for s in sups]})


# ------------------------------------------------------------ martingale part


def martingale_increments(config, n, states, dts):
    """``dM_i = u_{i+1} - u_i - dt_i * drift(u_i)`` for step-resolved states."""
    drift = galerkin_drift(config, n, states[:, :-1])
    return states[:, 1:] - states[:, :-1] - dts[None, :, None] * drift


def qv_sums(config, n, states, dts):
    """Per-trajectory realized and predicted quadratic variation over [0, T]."""
    dM = martingale_increments(config, n, states, dts)
    realized = np.sum(dM * dM, axis=(1, 2))
    F = np.array(config.noise.truncated(n).directions)
    _, B = noise_terms(F, states[:, :-1])
    predicted = np.sum(B * B, axis=(2, 3)) @ dts
    return realized, predicted


def qv_paths(config, indices, n=None):
    """Cumulative realized and predicted quadratic variation paths."""
    n = config.n_galerkin if n is None else n
    cfg = config.replace(record_every=1)
    ens = simulate_ensemble(cfg, indices, n=n)
    dts = ens.dts
    dM = martingale_increments(cfg, n, ens.states, dts)
    F = np.array(config.noise.truncated(n).directions)
    _, B = noise_terms(F, ens.states[:, :-1])
    zero = np.zeros((len(indices), 1))
    realized = np.concatenate([zero, np.cumsum(np.sum(dM * dM, axis=-1), axis=1)], axis=1)
    predicted = np.concatenate(
        [zero, np.cumsum(np.sum(B * B, axis=(2, 3)) * dts, axis=1)], axis=1
    )
    return ens.times, realized, predicted


def _qv_at(config, ensemble, chunk):
    cfg = config.replace(record_every=1)
    if cfg.n_steps < 100:
        raise DomainError(f"fewer than 100 steps ({cfg.n_steps}); refine dt for the quadratic-variation check")
    n = cfg.n_galerkin
    R, P = [], []
    for idx in _chunks(ensemble, chunk):
        ens = simulate_ensemble(cfg, idx, n=n)
        r, p = qv_sums(cfg, n, ens.states, ens.dts)
        R.append(r)
        P.append(p)
    R, P = np.concatenate(R), np.concatenate(P)
    mR, mP = float(R.mean()), float(P.mean())
    if mP == 0.0:
        return {"value": mR, "se": float(R.std(ddof=1) / math.sqrt(R.size)), "realized": mR,
                "predicted": mP, "degenerate": True}
    ratio = mR / mP
    resid = (R - ratio * P) / mP
    se = float(resid.std(ddof=1) / math.sqrt(R.size))
    return {"value": abs(ratio - 1.0), "se": se, "realized": mR, "predicted": mP,
            "degenerate": False}


def qv_check(config, ensemble, tol=0.1, refine=True, chunk=64):
    """Relative error between realized and predicted quadratic variation.

    Passes when the error at ``config.dt`` is at most ``tol`` and, with
    ``refine``, the error at ``dt/2`` is no larger (within two standard
    errors).
    """
    if ensemble < 2:
        raise ConfigurationError("ensemble must be at least 2", "ensemble")
    h, seed = _meta(config)
    dts = [config.dt] + ([config.dt / 2] if refine else [])
    res = [_qv_at(config.replace(dt=d), ensemble, chunk) for d in dts]
    rows = [{"key": f"quadratic-variation:dt={d:g}", "n": config.n_galerkin,
             "value": r["value"], "se": r["se"], "ensemble": int(ensemble)}
            for d, r in zip(dts, res)]
    if res[0]["degenerate"]:
        ok = all(r["value"] <= 1e-12 * config.T for r in res)
    else:
        ok = res[0]["value"] <= tol
        if refine:
            ok = ok and res[1]["value"] <= res[0]["value"] + 2 * math.hypot(res[0]["se"], res[1]["se"])
    return EstimateReport("quadratic-variation", rows, PASS if ok else FAIL, h, seed,
                          {"dt": dts, "realized": [r["realized"] for r in res],
                           "predicted": [r["predicted"] for r in res], "tol": tol})


def _h_values(name, u2):
    if name == "one":
        return np.ones(u2.shape[0])
    if name == "norm_sq":
        return np.sum(u2 * u2, axis=-1)
    if name == "proj_e1":
        return np.clip(u2[:, 0], -1.0, 1.0)
    raise DomainError(f"unknown h functional {name!r}; choose from {', '.join(H_FUNCTIONALS)}")


def _eta_vec(eta, size):
    if np.isscalar(eta):
        v = np.zeros(size)
        if not 1 <= int(eta) <= size:
            raise DomainError(f"eta mode {eta} outside 1..{size}")
        v[int(eta) - 1] = 1.0
        return v, f"e{int(eta)}"
    v = np.asarray(eta.coeffs if isinstance(eta, SpectralField) else eta, dtype=float)
    return v, "custom"


def weak_martingale_test(config, t1, t2, eta_list, h_list, ensemble, chunk=64):
    """Martingale identities for the discrete ``M_n`` between ``t2 <= t1``.

    First moment: ``E[<M(t1) - M(t2), eta> h] = 0``.  Second moment:
    ``E[(<M(t1),a><M(t1),b> - <M(t2),a><M(t2),b>
    - sum_k int_{t2}^{t1} <B_k,a><B_k,b> dt) h] = 0`` for ``a = b = eta`` and,
    with two or more ``eta``, for the first pair.  ``h`` is evaluated on
    ``u(t2)``.  Each statistic passes when within three standard errors of
    zero (with an absolute floor of 1e-10 for degenerate ensembles).
    """
    if not 0 <= t2 <= t1 <= config.T * (1 + 1e-12):
        raise DomainError(f"need 0 <= t2 <= t1 <= T, got t2={t2}, t1={t1}")
    for name in h_list:
        _h_values(name, np.zeros((1, config.basis.size)))
    h_, seed = _meta(config)
    cfg = config.replace(record_every=1)
    n = cfg.n_galerkin
    times = record_times(cfg)
    i1 = int(np.argmin(np.abs(times - t1)))
    i2 = int(np.argmin(np.abs(times - t2)))
    etas = [_eta_vec(e, cfg.basis.size) for e in eta_list]
    pairs = [(a, a) for a in range(len(etas))]
    if len(etas) > 1:
        pairs.append((0, 1))
    Fn = np.array(cfg.noise.truncated(n).directions)
    first = {(e, hn): [] for e in range(len(etas)) for hn in h_list}
    second = {(p, hn): [] for p in pairs for hn in h_list}
    for idx in _chunks(ensemble, chunk):
        ens = simulate_ensemble(cfg, idx, n=n)
        dts = ens.dts
        dM = martingale_increments(cfg, n, ens.states, dts)
        M1 = dM[:, :i1].sum(axis=1)
        M2 = dM[:, :i2].sum(axis=1)
        _, B = noise_terms(Fn, ens.states[:, i2:i1])
        hv = {hn: _h_values(hn, ens.states[:, i2]) for hn in h_list}
        proj1 = [M1 @ v for v, _ in etas]
        proj2 = [M2 @ v for v, _ in etas]
        Bp = [B @ v for v, _ in etas]  # (E, steps, N)
        for e in range(len(etas)):
            for hn in h_list:
                first[(e, hn)].append((proj1[e] - proj2[e]) * hv[hn])
        for (a, b) in pairs:
            comp = np.sum(Bp[a] * Bp[b], axis=2) @ dts[i2:i1]
            y = proj1[a] * proj1[b] - proj2[a] * proj2[b] - comp
            for hn in h_list:
                second[((a, b), hn)].append(y * hv[hn])
    rows, ok = [], True

    def add(key, samples):
        nonlocal ok
        x = np.concatenate(samples)
        m, s = mean_se(x)
        good = abs(m) <= 3 * s + 1e-10
        ok = ok and good
        rows.append({"key": key, "n": n, "value": m, "se": s, "ensemble": int(x.size),
                     "pass": good})

    for (e, hn), samples in first.items():
        add(f"martingale-increment:eta={etas[e][1]}:h={hn}", samples)
    for ((a, b), hn), samples in second.items():
        add(f"martingale-covariation:eta={etas[a][1]},{etas[b][1]}:h={hn}", samples)
    return EstimateReport("martingale", rows, PASS if ok else FAIL, h_, seed,
                          {"t1": float(times[i1]), "t2": float(times[i2])})


# ------------------------------------------------------------ Galerkin limit


def commutation_defect(u_n, n, params):
    """``|(I - Z_n) F(u_n)|``: the part of the nonlinearity outside the first
    ``n`` modes."""
    basis = u_n.basis
    if int(n) != n or not 1 <= n <= basis.size:
        raise DomainError(f"n must lie in 1..{basis.size}, got {n}")
    Fu = nonlinearity(basis, u_n.coeffs, params.n_exp)
    return float(np.linalg.norm(Fu[int(n):]))


def defect_curve(u, n_list, params):
    """Commutation defect of ``Z_n u / |Z_n u|`` for each ``n``."""
    out = []
    for n in n_list:
        c = np.array(u.coeffs)
        c[int(n):] = 0.0
        c /= np.linalg.norm(c)
        out.append(commutation_defect(SpectralField(c, u.basis), n, params))
    return np.array(out)


def galerkin_convergence(config, n_list, ensemble, chunk=64):
    """``E sup_t |u_{n'}(t) - u_n(t)|`` for consecutive sizes, shared noise.

    Passes when the differences are non-increasing in ``n`` within two
    standard errors.
    """
    n_list = [int(n) for n in n_list]
    if any(b <= a for a, b in zip(n_list, n_list[1:])):
        raise DomainError("n_list must be strictly increasing")
    if n_list and (n_list[0] < 1 or n_list[-1] > config.basis.size):
        raise DomainError(f"n_list must lie in 1..{config.basis.size}")
    h, seed = _meta(config)
    if len(n_list) < 2:
        return EstimateReport("galerkin-cauchy", [], REPORT, h, seed)
    diffs = {n: [] for n in n_list[:-1]}
    for idx in _chunks(ensemble, chunk):
        prev = None
        for n in n_list:
            cur = simulate_ensemble(config, idx, n=n).states
            if prev is not None:
                d = cur - prev[1]
                diffs[prev[0]].append(np.sqrt(np.max(np.sum(d * d, axis=-1), axis=1)))
            prev = (n, cur)
    rows = []
    for a, b in zip(n_list, n_list[1:]):
        m, s = mean_se(np.concatenate(diffs[a]))
        rows.append({"key": f"galerkin-cauchy:{a}-{b}", "n": a, "value": m, "se": s,
                     "ensemble": int(ensemble)})
    ok = all(
        r2["value"] <= r1["value"] + 2 * math.hypot(r1["se"], r2["se"])
        for r1, r2 in zip(rows, rows[1:])
    )
    return EstimateReport("galerkin-cauchy", rows, PASS if ok else FAIL, h, seed)


# ------------------------------------------------------------ time stepping


def sphere_drift(config, dt_list, ensemble, min_order=0.8, scheme="euler_ito", chunk=64):
    """Sphere defect of the raw (non-renormalized) scheme under refinement.

    Reports ``E| |u(T)|^2 - 1 |`` per step size with its observed order, the
    signed mean ``E[|u(T)|^2 - 1]`` and ``max_t E| |u(t)|^2 - 1 |``.  Passes
    when the observed order of the first quantity is at least ``min_order``.
    """
    h, seed = _meta(config)
    rows, errs, signed, maxt = [], [], [], []
    for dt in dt_list:
        cfg = config.replace(dt=float(dt), renormalize=False, scheme=scheme)
        absT, sgn, mx = [], [], []
        for idx in _chunks(ensemble, chunk):
            ens = simulate_ensemble(cfg, idx, check=False)
            r = np.sum(ens.states * ens.states, axis=-1) - 1.0
            absT.append(np.abs(r[:, -1]))
            sgn.append(r[:, -1])
            mx.append(np.abs(r))
        m, s = mean_se(np.concatenate(absT))
        sm, ss = mean_se(np.concatenate(sgn))
        errs.append(m)
        signed.append(sm)
        maxt.append(float(np.concatenate(mx).mean(axis=0).max()))
        rows.append({"key": f"sphere-drift:dt={dt:g}", "n": cfg.n_galerkin, "value": m,
                     "se": s, "ensemble": int(ensemble)})
        rows.append({"key": f"sphere-drift-signed:dt={dt:g}", "n": cfg.n_galerkin,
                     "value": sm, "se": ss, "ensemble": int(ensemble)})
    order = observed_order(dt_list, errs)
    ok = bool(np.isfinite(order) and order >= min_order)
    return EstimateReport("sphere-drift", rows, PASS if ok else FAIL, h, seed,
                          {"order": order, "abs_error": errs, "signed_error": signed,
                           "max_t_error": maxt, "min_order": min_order})


def renormalized_sphere_defect(config, ensemble, chunk=64):
    """Largest pathwise ``| |u|^2 - 1 |`` with renormalization switched on."""
    h, seed = _meta(config)
    cfg = config.replace(renormalize=True)
    worst = 0.0
    for idx in _chunks(ensemble, chunk):
        ens = simulate_ensemble(cfg, idx)
        worst = max(worst, float(np.max(np.abs(np.sum(ens.states**2, axis=-1) - 1.0))))
    return EstimateReport("sphere-renormalized",
                          [{"n": cfg.n_galerkin, "value": worst, "se": 0.0,
                            "ensemble": int(ensemble)}],
                          PASS if worst <= 1e-12 else FAIL, h, seed)


def scheme_discrepancy(config, dt_list, ensemble, min_order=0.4, chunk=64,
                       schemes=("euler_ito", "heun_strat")):
    """``E sup_t |u_a(t) - u_b(t)|`` for two schemes on the same Brownian path."""
    h, seed = _meta(config)
    rows, errs = [], []
    for dt in dt_list:
        cfg = config.replace(dt=float(dt))
        vals = []
        for idx in _chunks(ensemble, chunk):
            a = simulate_ensemble(cfg, idx, scheme=schemes[0]).states
            b = simulate_ensemble(cfg, idx, scheme=schemes[1]).states
            d = a - b
            vals.append(np.sqrt(np.max(np.sum(d * d, axis=-1), axis=1)))
        m, s = mean_se(np.concatenate(vals))
        errs.append(m)
        rows.append({"key": f"scheme-discrepancy:dt={dt:g}", "n": cfg.n_galerkin,
                     "value": m, "se": s, "ensemble": int(ensemble)})
    order = observed_order(dt_list, errs)
    ok = bool(np.isfinite(order) and order >= min_order)
    return EstimateReport("scheme-discrepancy", rows, PASS if ok else FAIL, h, seed,
                          {"order": order, "schemes": list(schemes)})


def strong_self_convergence(config, dt_list, ensemble, ref_factor=8, min_order=0.4,
                            scheme="euler_ito", chunk=64):
    """``E |u_dt(T) - u_ref(T)|`` against a run at ``min(dt_list) / ref_factor``
    driven by the refined Brownian path."""
    h, seed = _meta(config)
    ref_dt = min(dt_list) / ref_factor
    errs = {dt: [] for dt in dt_list}
    for idx in _chunks(ensemble, chunk):
        ref = simulate_ensemble(config.replace(dt=ref_dt, record_every=10**9), idx,
                                scheme=scheme).states[:, -1]
        for dt in dt_list:
            u = simulate_ensemble(config.replace(dt=float(dt), record_every=10**9), idx,
                                  scheme=scheme).states[:, -1]
            errs[dt].append(np.linalg.norm(u - ref, axis=-1))
    rows, means = [], []
    for dt in dt_list:
        m, s = mean_se(np.concatenate(errs[dt]))
        means.append(m)
        rows.append({"key": f"strong-error:dt={dt:g}", "n": config.n_galerkin, "value": m,
                     "se": s, "ensemble": int(ensemble)})
    order = observed_order(dt_list, means)
    ok = bool(np.isfinite(order) and order >= min_order)
    return EstimateReport("strong-self-convergence", rows, PASS if ok else FAIL, h, seed,
                          {"order": order, "reference_dt": ref_dt})


# ------------------------------------------------------------ deterministic suite


def random_unit_coeffs(rng, size, count, decay=0.0):
    """Gaussian coefficient vectors scaled by ``j**-decay``, normalized."""
    c = rng.standard_normal((count, size)) * np.arange(1, size + 1) ** -float(decay)
    return c / np.linalg.norm(c, axis=1, keepdims=True)


def _V(basis, c):
    return np.sqrt(sq_norms(basis, c)["V"])


def projection_identity_error(basis, params, coeffs, a_values=(0.0, 1.0, 7.3)):
    """Largest ``|pi_u(-Au - a u - u^(2n-1)) - (-Au + F(u))|`` over fields and ``a``."""
    worst = 0.0
    for c in coeffs:
        u = SpectralField(c, basis)
        closed = drift_strat(u, params).coeffs
        for a in a_values:
            direct = constrained_rhs(u, ModelParams(params.n_exp, a)).coeffs
            worst = max(worst, float(np.linalg.norm(direct - closed)))
    return worst


def ito_fd_error(F, c, eps=1e-5):
    """Relative error of ``m_k`` against central differences of ``B_k``
    along ``B_k(u)``, maximized over ``k``."""
    _, B = noise_terms(F, c)
    m = ito_terms(F, c)
    worst = 0.0
    for k in range(F.shape[0]):
        b = B[k]
        fk = F[k:k + 1]
        plus = noise_terms(fk, c + eps * b)[1][0]
        minus = noise_terms(fk, c - eps * b)[1][0]
        fd = (plus - minus) / (2 * eps)
        scale = max(float(np.linalg.norm(m[k])), 1e-300)
        if np.linalg.norm(m[k]) == 0.0:
            worst = max(worst, float(np.linalg.norm(fd)))
        else:
            worst = max(worst, float(np.linalg.norm(fd - m[k])) / scale)
    return worst


def _ball_pairs(rng, basis, count, radius=2.0, decay=2.0):
    """Pairs in the V-ball of ``radius``: half far apart, half close."""
    u = random_unit_coeffs(rng, basis.size, count, decay)
    v = random_unit_coeffs(rng, basis.size, count, decay)
    close = np.arange(count) % 2 == 1
    v[close] = u[close] + 10.0 ** rng.uniform(-6, -1, close.sum())[:, None] * v[close]
    u = u / _V(basis, u)[:, None] * radius * rng.uniform(0.05, 1, count)[:, None]
    v = v / _V(basis, v)[:, None] * radius * rng.uniform(0.05, 1, count)[:, None]
    return u, v


def lipschitz_B(basis, noise, u, v):
    """Largest ``|B_k(u) - B_k(v)|_V / (|f_k|_V (|u|_V + |v|_V) |u - v|_V)``."""
    F = noise.directions
    fV = _V(basis, F)
    _, Bu = noise_terms(F, u)
    _, Bv = noise_terms(F, v)
    num = _V(basis, Bu - Bv)  # (count, N)
    den = fV[None, :] * ((_V(basis, u) + _V(basis, v)) * _V(basis, u - v))[:, None]
    keep = fV > 0
    return float(np.max(num[:, keep] / den[:, keep])) if keep.any() else 0.0


def lipschitz_m(basis, noise, u, v):
    """Largest ``|m_k(u) - m_k(v)|_V`` over
    ``|f_k|_V^2 (2 + |u|_V^2 + |v|_V^2 + (|u|_V + |v|_V)^2) |u - v|_V``."""
    F = noise.directions
    fV = _V(basis, F)
    num = _V(basis, ito_terms(F, u) - ito_terms(F, v))
    a, b = _V(basis, u), _V(basis, v)
    den = fV[None, :] ** 2 * ((2 + a * a + b * b + (a + b) ** 2) * _V(basis, u - v))[:, None]
    keep = fV > 0
    return float(np.max(num[:, keep] / den[:, keep])) if keep.any() else 0.0


def lipschitz_F(basis, params, u, v):
    """Ratios ``|F(u) - F(v)| / |u - v|_V`` against a fitted growth bound.

    The bound has the form ``G(s) = sum_i g_i s**i`` in ``s = |u|_V + |v|_V``
    with ``g_i >= 0``.  It is fitted as the least-area upper envelope of the
    first half of the pairs (a linear program) and then evaluated on the
    held-out second half.  Returns ``(max held-out ratio / G, max ratio)``.
    """
    Fu = nonlinearity(basis, u, params.n_exp)
    Fv = nonlinearity(basis, v, params.n_exp)
    ratio = np.linalg.norm(Fu - Fv, axis=1) / _V(basis, u - v)
    s = _V(basis, u) + _V(basis, v)
    X = s[:, None] ** np.arange(2 * params.n_exp + 1)
    half = ratio.size // 2
    fit = linprog(X[:half].sum(axis=0), A_ub=-X[:half], b_ub=-ratio[:half],
                  bounds=(0, None), method="highs")
    if not fit.success:
        raise RuntimeError(f"growth-bound fit failed: {fit.message}")
    G = X[half:] @ fit.x
    return float(np.max(ratio[half:] / G)), float(np.max(ratio))


def elliptic_equivalence(basis, coeffs):
    """``(min, max)`` of ``|u|_{D(A)} / |Au|_V`` next to the constants
    ``c1 = (1 + 1/mu_1^2)^(-1/2)`` and ``c2 = (1 + 1/mu_1^2)^(1/2)``."""
    sq = sq_norms(basis, coeffs)
    r = np.sqrt(sq["DA"] / sq["AV"])
    mu1 = float(basis.mu[0])
    c2 = math.sqrt(1 + 1 / mu1**2)
    return float(r.min()), float(r.max()), 1 / c2, c2


def deterministic_suite(basis, params, noise, samples=1000, seed=0, config_hash=""):
    """Geometry, projection identity, Lipschitz probes and commutation defect.

    Returns a list of reports; each carries the worst observed quantity.
    """
    rng = np.random.default_rng(seed)
    reports = []

    def add(key, value, ok, count=samples, **details):
        reports.append(EstimateReport(
            key, [{"n": basis.size, "value": value, "se": 0.0, "ensemble": count}],
            PASS if ok else FAIL, config_hash, seed, details,
        ))

    units = random_unit_coeffs(rng, basis.size, samples, decay=1.0)
    err = projection_identity_error(basis, params, units)
    add("projection-identity", err, err <= 1e-10)

    _, B = noise_terms(noise.directions, units)
    tang = float(np.max(np.abs(np.einsum("eks,es->ek", B, units))))
    add("noise-tangency", tang, tang <= 1e-12)

    h = rng.standard_normal((samples, basis.size))
    ph = h - np.sum(h * units, axis=1, keepdims=True) * units
    tproj = float(np.max(np.abs(np.sum(ph * units, axis=1))))
    add("projection-tangency", tproj, tproj <= 1e-12)
    pph = ph - np.sum(ph * units, axis=1, keepdims=True) * units
    idem = float(np.max(np.abs(pph - ph)))
    add("projection-idempotent", idem, idem <= 1e-12)

    ds = [drift_strat(SpectralField(c, basis), params).coeffs for c in units[:100]]
    dtan = float(max(abs(np.dot(d, c)) / max(1.0, np.linalg.norm(d)) for d, c in zip(ds, units)))
    add("drift-tangency", dtan, dtan <= 1e-10, count=100)

    fd = max(ito_fd_error(noise.directions, c) for c in units[:100])
    add("ito-correction-fd", fd, fd <= 1e-6, count=100)

    u, v = _ball_pairs(rng, basis, samples)
    rB = lipschitz_B(basis, noise, u, v)
    add("lipschitz-B", rB, rB <= 4.0)
    rm = lipschitz_m(basis, noise, u, v)
    add("lipschitz-m", rm, rm <= 4.0)
    rF, maxF = lipschitz_F(basis, params, u, v)
    add("lipschitz-F", rF, rF <= 4.0, max_ratio=maxF)

    lo, hi, c1, c2 = elliptic_equivalence(basis, units)
    add("elliptic-equivalence", hi, lo >= c1 * (1 - 1e-12) and hi <= c2 * (1 + 1e-12),
        lower=lo, c1=c1, c2=c2)

    # closed-form reference: F(e_1) on (0, pi) with n_exp = 2 leaks 1/(2 pi) into e_3
    ref = build_basis(math.pi, 8, n_exp=2)
    d2 = commutation_defect(SpectralField.mode(ref, 1), 2, ModelParams(2))
    add("commutation-defect", d2, abs(d2 - 1 / (2 * math.pi)) <= 1e-10, count=1,
        expected=1 / (2 * math.pi))
    n2 = min(2, basis.size)
    d1 = max(commutation_defect(SpectralField(c, basis), n2, ModelParams(1))
             for c in _in_span(units[:100], n2))
    add("commutation-defect-linear", d1, d1 == 0.0, count=100)
    return reports


def _in_span(coeffs, n):
    c = np.array(coeffs)
    c[:, n:] = 0.0
    return c / np.linalg.norm(c, axis=1, keepdims=True)
