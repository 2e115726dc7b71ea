"""SVG charts of state counts and run times per case and configuration."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .score import RunMetrics  # noqa: E402

# fixed ids and no timestamp, so reruns give identical files
matplotlib.rcParams["svg.hashsalt"] = "metaguard"
_SVG_META = {"Date": None, "Creator": None}


def _grid(rows: list[RunMetrics]):
    cases = []
    configs = []
    for r in rows:
        if r.case not in cases:
            cases.append(r.case)
        if r.config not in configs:
            configs.append(r.config)
    cell = {(r.case, r.config): r for r in rows}
    return cases, configs, cell


def _bars(rows, path, value, ylabel, title, broken=None):
    cases, configs, cell = _grid(rows)
    fig, ax = plt.subplots(figsize=(max(6.0, 1.1 * len(cases) + 2), 4.2))
    width = 0.8 / max(1, len(configs))
    for j, conf in enumerate(configs):
        xs, ys, hatch_x, hatch_y = [], [], [], []
        for i, case in enumerate(cases):
            r = cell.get((case, conf))
            if r is None:
                continue
            x = i + (j - (len(configs) - 1) / 2) * width
            v = value(r)
            if broken is not None and broken(r):
                hatch_x.append(x)
                hatch_y.append(v)
            elif v is not None:
                xs.append(x)
                ys.append(v)
        ax.bar(xs, ys, width, label=conf, color=f"C{j}")
        if hatch_x:
            # breached runs: hatched bar at the recorded ceiling
            ax.bar(hatch_x, hatch_y, width, color="white", edgecolor=f"C{j}", hatch="//")
    ax.set_xticks(range(len(cases)))
    ax.set_xticklabels([c.split("/")[-1] for c in cases], rotation=30, ha="right")
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    ax.set_yscale("log")
    ax.legend(fontsize="small")
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata=_SVG_META)
    plt.close(fig)


def plot_states(rows: list[RunMetrics], path):
    _bars(rows, path, lambda r: r.states, "states", "States generated (hatched: ceiling reached)",
          broken=lambda r: r.status == "ceiling")


def plot_times(rows: list[RunMetrics], path):
    _bars(rows, path, lambda r: r.wall_time if r.status in ("ok", "ceiling") else None,
          "seconds", "Analysis time")
