"""Run artifacts: manifest, JSON-lines reports, CSV exports and summaries."""

from __future__ import annotations

import csv
import datetime as _dt
import json
import os
from importlib import metadata

from .integrator import Trajectory
from .verification import EstimateReport

TRAJECTORY_COLUMNS = ("t", "sphere_defect", "V_norm_sq", "L2n_norm", "DA_norm_sq")
REPORT_COLUMNS = ("key", "n", "value", "se", "ensemble", "verdict")


def tool_version():
    try:
        return metadata.version("artifact")
    except metadata.PackageNotFoundError:
        return "0+unknown"


def write_manifest(out_dir, resolved, config_hash, command, outputs):
    """Write ``manifest.json`` (the first file of every run) and return its path."""
    os.makedirs(out_dir, exist_ok=True)
    manifest = {
        "tool": "shsim",
        "tool_version": tool_version(),
        "command": command,
        "config_hash": config_hash,
        "config": resolved,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "outputs": sorted(outputs),
    }
    path = os.path.join(out_dir, "manifest.json")
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def write_reports(path, reports):
    """One JSON object per line, fixed key order, no timestamps."""
    with open(path, "w", encoding="utf-8") as fh:
        for rep in reports:
            for rec in rep.records():
                fh.write(json.dumps(rec) + "\n")


def read_reports(path):
    with open(path, encoding="utf-8") as fh:
        return [json.loads(line) for line in fh if line.strip()]


def _energy_table(reports):
    by = {r.key.rsplit("-", 1)[-1]: r for r in reports}
    header = ["n"]
    for k in ("K1", "K2", "K3"):
        header += [f"{k}_mean", f"{k}_se"]
    ns = [row["n"] for row in by["K1"].rows]
    rows = []
    for i, n in enumerate(ns):
        row = [n]
        for k in ("K1", "K2", "K3"):
            row += [by[k].rows[i]["value"], by[k].rows[i]["se"]]
        rows.append(row)
    return header, rows


def export_plot_data(obj, path):
    """Write a plot-ready CSV with a header row.

    ``obj`` may be a :class:`Trajectory` (one row per recorded time), the three
    energy reports (one row per ``n``), or any report or list of reports (one
    row per record).
    """
    if isinstance(obj, Trajectory):
        header = list(TRAJECTORY_COLUMNS)
        d = obj.diagnostics
        rows = [[t, d["sphere_defect"][i], d["V_norm_sq"][i], d["L2n_norm"][i],
                 d["DA_norm_sq"][i]] for i, t in enumerate(obj.times)]
    else:
        reps = [obj] if isinstance(obj, EstimateReport) else list(obj)
        keys = {r.key for r in reps}
        if keys == {"energy-K1", "energy-K2", "energy-K3"} and len(reps) == 3:
            header, rows = _energy_table(reps)
        else:
            header = list(REPORT_COLUMNS)
            rows = [[rec[c] for c in REPORT_COLUMNS] for r in reps for rec in r.records()]
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([repr(float(x)) if isinstance(x, float) else x for x in row])
    return path


def summary_table(reports):
    """Human-readable fixed-width summary of report records."""
    lines = [f"{'key':<48} {'n':>6} {'value':>13} {'se':>11} {'ens':>6}  verdict"]
    for rep in reports:
        for rec in rep.records():
            n = "" if rec["n"] is None else str(rec["n"])
            v = "nan" if rec["value"] is None else f"{rec['value']:.6g}"
            s = "nan" if rec["se"] is None else f"{rec['se']:.3g}"
            lines.append(f"{rec['key']:<48} {n:>6} {v:>13} {s:>11} {rec['ensemble']:>6}  {rec['verdict']}")
    return "\n".join(lines)
