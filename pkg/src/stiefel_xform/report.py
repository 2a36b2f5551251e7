"""Structured run reports: JSON envelopes, delimited summaries, and optional
rendered figures.

JSON output is canonical (sorted keys, fixed separators) so that a run with
a fixed seed is byte-reproducible.  Wall-clock fields stay null unless
timings are explicitly requested, precisely to keep that property.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from pathlib import Path

from .identities import IdentityReport

SCHEMA_VERSION = "1"
TOOL_NAME = "stiefel-xform"
TOOL_VERSION = "0.1.0"

_EXIT_BY_STATUS = {"pass": 0, "fail": 1, "constant-mismatch": 2}


@dataclass
class ReportEnvelope:
    """Top-level result document for a CLI invocation."""

    command: str
    config: dict
    reports: list
    status: str = "pass"
    timestamp: str | None = None

    def __post_init__(self):
        self.status = aggregate_status(self.reports)

    @property
    def exit_code(self) -> int:
        return _EXIT_BY_STATUS[self.status]

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "tool": {"name": TOOL_NAME, "version": TOOL_VERSION},
            "timestamp": self.timestamp,
            "command": self.command,
            "config": self.config,
            "reports": [r.to_dict() if isinstance(r, IdentityReport) else r for r in self.reports],
            "status": self.status,
            "exit_code": self.exit_code,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":")) + "\n"


def aggregate_status(reports: list) -> str:
    """Worst verdict over gated reports: fail > constant-mismatch > pass."""
    status = "pass"
    for r in reports:
        d = r.to_dict() if isinstance(r, IdentityReport) else r
        if not d.get("gated", True):
            continue
        verdict = d.get("verdict", "pass")
        if verdict == "fail":
            return "fail"
        if verdict == "constant-mismatch":
            status = "constant-mismatch"
    return status


def format_text(envelope: ReportEnvelope) -> str:
    """Human-readable rendering with the same numeric content as the JSON."""
    out = io.StringIO()
    d = envelope.to_dict()
    out.write(f"{TOOL_NAME} {TOOL_VERSION}  command={d['command']}  status={d['status']}\n")
    out.write(f"config: {json.dumps(d['config'], sort_keys=True)}\n")
    for r in d["reports"]:
        if "z_score" in r:
            gate = "" if r.get("gated", True) else "  [diagnostic]"
            out.write(
                f"{r['verdict'].upper():18s} {r['id']:16s} z={r['z_score']:.3g} "
                f"lhs={r['lhs']['mean']:.8g}(se {r['lhs']['se']:.2g}) "
                f"rhs={r['rhs']['mean']:.8g}(se {r['rhs']['se']:.2g}) "
                f"const={r['constant_paper']}"
            )
            if r.get("constant_empirical"):
                ce = r["constant_empirical"]
                out.write(f" fit={ce['value']:.8g} ci=[{ce['ci_low']:.6g},{ce['ci_high']:.6g}]")
            if r.get("runtime_ms") is not None:
                out.write(f" t={r['runtime_ms']}ms")
            out.write(f" params={json.dumps(r['params'], sort_keys=True)}{gate}\n")
        else:
            out.write(json.dumps(r, sort_keys=True) + "\n")
    out.write(f"exit={d['exit_code']}\n")
    return out.getvalue()


_CSV_COLUMNS = [
    "id", "params", "verdict", "z_score",
    "lhs_mean", "lhs_se", "rhs_mean", "rhs_se",
    "constant_paper", "constant_fit", "fit_ci_low", "fit_ci_high",
    "samples", "seed", "gated",
]


def write_csv(envelope: ReportEnvelope, path: str | Path) -> None:
    """Flat per-report summary as comma-delimited text."""
    rows = []
    for r in envelope.to_dict()["reports"]:
        if "verdict" not in r:
            continue
        ce = r.get("constant_empirical") or {}
        rows.append({
            "id": r["id"],
            "params": json.dumps(r["params"], sort_keys=True),
            "verdict": r["verdict"],
            "z_score": r["z_score"],
            "lhs_mean": r["lhs"]["mean"],
            "lhs_se": r["lhs"]["se"],
            "rhs_mean": r["rhs"]["mean"],
            "rhs_se": r["rhs"]["se"],
            "constant_paper": r["constant_paper"],
            "constant_fit": ce.get("value"),
            "fit_ci_low": ce.get("ci_low"),
            "fit_ci_high": ce.get("ci_high"),
            "samples": r["lhs"]["samples"],
            "seed": r["seed"],
            "gated": r.get("gated", True),
        })
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=_CSV_COLUMNS)
        writer.writeheader()
        writer.writerows(rows)


def render_figures(envelope: ReportEnvelope, outdir: str | Path) -> list[Path]:
    """Render summary figures for a suite run to image files.

    Imports matplotlib lazily; the numerical core never depends on it.
    Returns the written paths.
    """
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    reports = [r for r in envelope.to_dict()["reports"] if "verdict" in r]
    written: list[Path] = []
    if not reports:
        return written

    labels = [f"{r['id']}" for r in reports]
    zs = [min(r["z_score"], 20.0) for r in reports]
    colors = ["tab:green" if r["verdict"] == "pass"
              else "tab:orange" if r["verdict"] == "constant-mismatch" else "tab:red"
              for r in reports]
    fig, ax = plt.subplots(figsize=(max(6.0, 0.32 * len(reports)), 4.2))
    ax.bar(range(len(reports)), zs, color=colors)
    ax.set_xticks(range(len(reports)))
    ax.set_xticklabels(labels, rotation=90, fontsize=7)
    ax.set_ylabel("z score (capped at 20)")
    ax.set_title("identity checks")
    ax.axhline(4.0, color="gray", linestyle="--", linewidth=0.8)
    fig.tight_layout()
    zpath = outdir / "zscores.png"
    fig.savefig(zpath, dpi=150)
    plt.close(fig)
    written.append(zpath)

    audited = [r for r in reports if r.get("constant_empirical") and r.get("constant_paper")]
    if audited:
        fig, ax = plt.subplots(figsize=(6.0, 4.0))
        names = [r["id"] for r in audited]
        ratios = [r["constant_empirical"]["value"] / r["constant_paper"] for r in audited]
        ax.bar(range(len(audited)), ratios, color="tab:blue")
        ax.axhline(1.0, color="gray", linestyle="--", linewidth=0.8)
        ax.set_xticks(range(len(audited)))
        ax.set_xticklabels(names, rotation=45, fontsize=8)
        ax.set_ylabel("fitted / registered constant")
        ax.set_title("constant audits")
        ax.set_yscale("log")
        fig.tight_layout()
        cpath = outdir / "constants.png"
        fig.savefig(cpath, dpi=150)
        plt.close(fig)
        written.append(cpath)
    return written
