"""Figures for simulation reports and the code catalog, written to files."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .code_core import CATALOG  # noqa: E402

STYLE = {
    "figure.figsize": (7.0, 4.2),
    "axes.spines.top": False,
    "axes.spines.right": False,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "font.size": 9,
    "legend.frameon": False,
    "savefig.dpi": 120,
}


def plot_report(report, path: str | Path) -> Path:
    """Per-cycle detections, recoveries and failures with cumulative delivery."""
    path = Path(path)
    cycles = [c.cycle for c in report.cycles]
    with plt.rc_context(STYLE):
        fig, (top, bottom) = plt.subplots(2, 1, sharex=True)
        top.step(cycles, [c.detections for c in report.cycles], where="mid", label="detections")
        top.step(cycles, [c.recoveries for c in report.cycles], where="mid", label="recoveries")
        top.step(cycles, [c.failures for c in report.cycles], where="mid", label="failures", color="tab:red")
        top.set_ylabel("per cycle")
        top.legend(loc="upper right", ncol=3)

        per_cycle = report.messages_sent // max(len(report.cycles), 1)
        sent = delivered = 0
        ratio = []
        for c in report.cycles:
            sent += per_cycle
            delivered += per_cycle - c.failures
            ratio.append(delivered / sent)
        bottom.plot(cycles, ratio, color="tab:green")
        bottom.axhline(float(report.capacity), ls="--", color="0.4", label=f"capacity {report.capacity}")
        bottom.set_ylim(0, 1.05)
        bottom.set_xlabel("cycle")
        bottom.set_ylabel("delivered fraction")
        bottom.legend(loc="lower right")
        fig.suptitle(f"{report.code_label}, t={report.config.t}, {report.config.adversary}, seed {report.seed}")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path


def plot_catalog(path: str | Path) -> Path:
    """Normalized capacity k/n of every catalog code next to (n-1)/n."""
    path = Path(path)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ns = [e.n for e in CATALOG]
        ax.plot(ns, [(n - 1) / n for n in ns], ls="--", color="0.5", label="rotation, one attacked path")
        built = [e for e in CATALOG if e.buildable]
        meta = [e for e in CATALOG if not e.buildable]
        ax.scatter([e.n for e in built], [e.k / e.n for e in built], marker="o", label="Hamming (built in)")
        ax.scatter([e.n for e in meta], [e.k / e.n for e in meta], marker="x", label="metadata only")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("channels n")
        ax.set_ylabel("normalized capacity")
        ax.legend(loc="lower right")
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return path
