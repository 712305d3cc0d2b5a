"""Figures for market outcomes, written next to the text reports."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "mobility-vcg",
}


def _safe(name: str) -> str:
    name = name.replace("->", "_to_")
    return "".join(c if c.isalnum() or c in "-_" else "_" for c in name)


def payments_figure(outcome, path):
    """Grouped bars of valuation, payment and minimum payment per traveler."""
    ids = [t.id for t in outcome.travelers]
    series = [("valuation", [float(t.valuation) for t in outcome.travelers]),
              ("payment", [float(t.payment) for t in outcome.travelers]),
              ("min payment", [float(t.min_payment) for t in outcome.travelers])]
    x = np.arange(len(ids))
    width = 0.8 / len(series)
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(max(3.5, 0.6 * len(ids) + 1.5), 2.6))
        for k, (label, ys) in enumerate(series):
            ax.bar(x + (k - 1) * width, ys, width, label=label)
        ax.set_xticks(x)
        ax.set_xticklabels(ids)
        ax.set_ylabel("currency")
        ax.set_title(f"{outcome.subclass}: welfare {outcome.welfare}", fontsize=9)
        ax.axhline(0, color="0.3", lw=0.6)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)


def loads_figure(outcome, services, path):
    """Riders per service against usage capacity."""
    a = outcome.assignment
    loads = a.loads()
    sids = list(a.services)
    x = np.arange(len(sids))
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(max(3.0, 0.6 * len(sids) + 1.5), 2.4))
        ax.bar(x, [services[s].capacity for s in sids], 0.6, color="0.85", label="capacity")
        ax.bar(x, [loads[s] for s in sids], 0.4, label="assigned")
        ax.set_xticks(x)
        ax.set_xticklabels(sids)
        ax.set_ylabel("riders")
        ax.set_title(outcome.subclass, fontsize=9)
        ax.legend(frameon=False)
        fig.tight_layout()
        fig.savefig(path, metadata={"Software": None})
        plt.close(fig)


def write_figures(outcomes, directory, services=None, fmt="png") -> list:
    """One payments figure per subclass, plus a loads figure when services are known."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    written = []
    for o in outcomes:
        p = directory / f"payments_{_safe(o.subclass)}.{fmt}"
        payments_figure(o, p)
        written.append(p)
        if services is not None:
            p = directory / f"loads_{_safe(o.subclass)}.{fmt}"
            loads_figure(o, services, p)
            written.append(p)
    return written
