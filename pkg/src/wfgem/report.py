"""Deterministic report serialization: canonical JSON, CSV tables, manifest.

The primary report (`report.json`) is a pure function of (checks, seed,
scale): keys are sorted, floats round-trip exactly via repr, and volatile
data (timestamps, runtimes, library versions, worker counts) is confined to
`manifest.json`.  Two runs with the same seed produce byte-identical
report files regardless of scheduling.

All writes are atomic (temp file + rename) so a crashed run never leaves a
truncated artifact behind.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
import sys
import tempfile
from datetime import datetime, timezone
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "canonical_json",
    "write_text_atomic",
    "params_hash",
    "suite_report_dict",
    "suite_exit_code",
    "write_suite_report",
    "write_summary_csv",
    "write_manifest",
    "write_csv",
    "kernel_csv_rows",
    "path_csv",
    "gem_path_csv",
    "coupling_csv",
    "histogram_csv",
]


def canonical_json(obj) -> str:
    """Canonical JSON text: sorted keys, fixed separators, trailing newline."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def write_text_atomic(path: str, text: str) -> str:
    """Write text to `path` atomically (temp file in the same dir + rename)."""
    d = os.path.dirname(os.path.abspath(path)) or "."
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as f:
            f.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return path


def params_hash(params: dict) -> str:
    """Stable 12-hex digest of a check's parameter dict."""
    blob = json.dumps(params, sort_keys=True, ensure_ascii=True).encode()
    return hashlib.sha256(blob).hexdigest()[:12]


def suite_report_dict(reports: Sequence, seed: int, scale: str, names: Sequence[str]) -> dict:
    """Deterministic suite report: config + canonical check reports + tallies."""
    checks = [r.canonical() for r in reports]
    counts = {"PASS": 0, "FAIL": 0, "INCONCLUSIVE": 0}
    for r in reports:
        counts[r.status] = counts.get(r.status, 0) + 1
    return {
        "config": {"checks": sorted(names), "seed": seed, "scale": scale},
        "summary": {
            "n_reports": len(checks),
            "counts": counts,
            "overall": "FAIL"
            if counts["FAIL"]
            else ("INCONCLUSIVE" if counts["INCONCLUSIVE"] else "PASS"),
        },
        "reports": checks,
    }


def suite_exit_code(reports: Sequence) -> int:
    """0 all pass, 1 any failure, 2 inconclusive but no failure."""
    statuses = {r.status for r in reports}
    if "FAIL" in statuses:
        return 1
    if "INCONCLUSIVE" in statuses:
        return 2
    return 0


def write_suite_report(out_dir: str, reports: Sequence, seed: int, scale: str, names: Sequence[str]) -> str:
    doc = suite_report_dict(reports, seed, scale, names)
    return write_text_atomic(os.path.join(out_dir, "report.json"), canonical_json(doc))


def _csv_text(header: Sequence[str], rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([_cell(v) for v in row])
    return buf.getvalue()


def _cell(v):
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, (int, np.integer)):
        return int(v)
    return v


def write_csv(path: str, header: Sequence[str], rows) -> str:
    """CSV with a header row always present, written atomically."""
    return write_text_atomic(path, _csv_text(header, rows))


def write_summary_csv(out_dir: str, reports: Sequence) -> str:
    """Margin matrix: one row per (check, params) with its hash and status."""
    rows = [
        (r.name, params_hash(r.canonical()["params"]), _cell(float(r.margin)), r.status)
        for r in reports
    ]
    return write_csv(
        os.path.join(out_dir, "summary.csv"),
        ("check", "params_hash", "margin", "status"),
        rows,
    )


def write_manifest(
    out_dir: str,
    command: str,
    config: dict,
    artifacts: Sequence[dict],
    runtimes: Optional[dict] = None,
    status: Optional[str] = None,
) -> str:
    """Run metadata: everything volatile lives here, not in report.json."""
    import numpy
    import scipy

    from . import __version__

    doc = {
        "command": command,
        "config": config,
        "timestamp": datetime.now(timezone.utc).isoformat(),
        "versions": {
            "python": sys.version.split()[0],
            "numpy": numpy.__version__,
            "scipy": scipy.__version__,
            "package": __version__,
        },
        "artifacts": list(artifacts),
        "runtimes_s": runtimes or {},
        "status": status,
    }
    return write_text_atomic(
        os.path.join(out_dir, "manifest.json"), canonical_json(doc)
    )


def artifact(path: str, schema: str, description: str) -> dict:
    """Manifest entry for one output file."""
    return {"file": os.path.basename(path), "schema": schema, "description": description}


def kernel_csv_rows(t: float, xg: np.ndarray, yg: np.ndarray, values: np.ndarray, trunc: float):
    """Flatten a kernel evaluation grid into (t, x, y, value, trunc_err) rows."""
    for i, x in enumerate(xg):
        for j, y in enumerate(yg):
            yield (t, float(x), float(y), float(values[i, j]), trunc)


def path_csv(path: str, sample) -> str:
    """One diffusion path as (t, state) rows."""
    rows = zip(sample.times, sample.states)
    return write_csv(path, ("t", "state"), rows)


def gem_path_csv(path: str, gpath) -> str:
    """Stick-breaking path: time, coordinates, masses, and remainder."""
    n = gpath.coord_states.shape[1]
    header = (
        ["t"]
        + [f"x{i}" for i in range(1, n + 1)]
        + [f"mass{i}" for i in range(1, n + 1)]
        + ["remainder"]
    )
    rows = []
    for k, t in enumerate(gpath.times):
        pt = gpath.points[k]
        rows.append(
            [t]
            + [float(v) for v in gpath.coord_states[k]]
            + [float(v) for v in pt.masses]
            + [float(pt.remainder)]
        )
    return write_csv(path, header, rows)


def coupling_csv(path: str, cp) -> str:
    """Coupled pair path with the deterministic envelope: (t, x, y, rho, envelope)."""
    from .constants import rho as rho_fn

    rr = rho_fn(cp.x, cp.y)
    rows = zip(cp.times, cp.x, cp.y, rr, cp.envelope)
    return write_csv(path, ("t", "x", "y", "rho", "envelope"), rows)


def histogram_csv(path: str, histogram: np.ndarray) -> str:
    """Occupation histogram over [0,1]: (bin_lo, bin_hi, count)."""
    nb = histogram.size
    edges = np.linspace(0.0, 1.0, nb + 1)
    rows = zip(edges[:-1], edges[1:], histogram)
    return write_csv(path, ("bin_lo", "bin_hi", "count"), rows)
