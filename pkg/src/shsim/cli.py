"""Command-line front end.

Usage::

    shsim <subcommand> --config PATH [--seed N] [--out DIR]

Exit status is 0 when every verdict passes (report-only counts as passing),
1 when any verdict fails or a run diverges, and 2 for configuration errors.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys

import numpy as np

from . import config as cfgmod
from . import output, verification
from .errors import ConfigurationError, DegenerateInitialCondition, DomainError, IntegrationError
from .integrator import simulate
from .snapshot import write_snapshot
from .spectral import SpectralField

SUBCOMMANDS = ("simulate", "verify", "estimate", "aldous", "qv", "martingale", "converge", "defect")

log = logging.getLogger("shsim")

PLANNED = {
    "simulate": ["trajectory.csv", "snapshots.bin"],
    "estimate": ["reports.jsonl", "energy.csv"],
}


def _run_verify(spec):
    sim = spec.sim
    return verification.deterministic_suite(
        sim.basis, sim.params, sim.noise, seed=sim.master_seed, config_hash=spec.config_hash
    )


def _run_estimate(spec):
    return verification.energy_estimates(spec.sim, spec.suite["n_list"], spec.suite["ensemble"],
                                         chunk=spec.suite["chunk"])


def _run_aldous(spec):
    s = spec.suite
    return [verification.aldous_statistic(spec.sim, s["n_list"], s["delta_list"], s["epsilon"],
                                          s["ensemble"], chunk=s["chunk"])]


def _run_qv(spec):
    return [verification.qv_check(spec.sim, spec.suite["ensemble"], chunk=spec.suite["chunk"])]


def _run_martingale(spec):
    s = spec.suite
    h = [x.strip() for x in s["h"].split(",") if x.strip()]
    return [verification.weak_martingale_test(spec.sim, s["t1"], s["t2"], s["eta"], h,
                                              s["ensemble"], chunk=s["chunk"])]


def _run_converge(spec):
    s = spec.suite
    return [verification.galerkin_convergence(spec.sim, s["n_list"], s["ensemble"],
                                              chunk=s["chunk"])]


def _run_defect(spec):
    sim = spec.sim
    u = SpectralField(sim.u0, sim.basis)
    ns = [n for n in spec.suite["n_list"] if 1 <= n <= sim.basis.size]
    if len(ns) != len(spec.suite["n_list"]):
        raise DomainError(f"n_list entries must lie in 1..{sim.basis.size}")
    curve = verification.defect_curve(u, ns, sim.params)
    rows = [{"n": int(n), "value": float(d), "se": 0.0, "ensemble": 1}
            for n, d in zip(ns, curve)]
    return [verification.EstimateReport("commutation-defect", rows, verification.REPORT,
                                        spec.config_hash, sim.master_seed)]


RUNNERS = {
    "verify": _run_verify,
    "estimate": _run_estimate,
    "aldous": _run_aldous,
    "qv": _run_qv,
    "martingale": _run_martingale,
    "converge": _run_converge,
    "defect": _run_defect,
}


def _simulate(spec, out):
    traj = simulate(spec.sim, spec.suite["trajectory"])
    output.export_plot_data(traj, os.path.join(out, "trajectory.csv"))
    write_snapshot(os.path.join(out, "snapshots.bin"), spec.sim.basis, traj.states)
    d = traj.diagnostics
    print(f"simulated trajectory {traj.trajectory_index}: {traj.times.size} records, "
          f"max |sphere defect| {np.max(np.abs(d['sphere_defect'])):.3e}")
    return True


def build_parser():
    p = argparse.ArgumentParser(prog="shsim", description=__doc__.split("\n")[0])
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", required=True, help="configuration file")
    p.add_argument("--seed", type=int, default=None, help="override master_seed")
    p.add_argument("--out", default="shsim-out", help="artifact directory")
    p.add_argument("-v", "--verbose", action="store_true")
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    try:
        spec = cfgmod.parse_config(args.config, seed=args.seed)
    except ConfigurationError as exc:
        key = f" [{exc.key}]" if exc.key else ""
        print(f"configuration error{key}: {exc}", file=sys.stderr)
        return 2

    out = args.out
    outputs = ["manifest.json", "config.ini"] + PLANNED.get(args.subcommand, ["reports.jsonl"])
    output.write_manifest(out, spec.resolved, spec.config_hash, args.subcommand, outputs)
    with open(os.path.join(out, "config.ini"), "w", encoding="utf-8") as fh:
        fh.write(cfgmod.to_text(spec.resolved))

    try:
        if args.subcommand == "simulate":
            return 0 if _simulate(spec, out) else 1
        reports = RUNNERS[args.subcommand](spec)
    except (ConfigurationError, DomainError, DegenerateInitialCondition) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except IntegrationError as exc:
        print(f"run failed: {exc} (step {exc.step}, t={exc.time})", file=sys.stderr)
        return 1

    output.write_reports(os.path.join(out, "reports.jsonl"), reports)
    if args.subcommand == "estimate":
        output.export_plot_data(reports, os.path.join(out, "energy.csv"))
    print(output.summary_table(reports))
    return 0 if all(r.passed for r in reports) else 1


if __name__ == "__main__":
    sys.exit(main())
