"""Figures written next to the text/CSV reports."""
from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STAGE_COLORS = {"preparation": "tab:red", "G computation": "tab:green", "linear training": "tab:purple",
                "prediction": "tab:blue"}


def _figure(width=6.0, height=None):
    golden_ratio = (np.sqrt(5) - 1.0) / 2.0
    fig, ax = plt.subplots(figsize=(width, height or width * golden_ratio))
    return fig, ax


def plot_timings(timings: dict, path, title: str = "timing breakdown") -> str:
    """Horizontal bars per stage on a log axis."""
    stages = [s for s in timings if timings[s] > 0]
    fig, ax = _figure()
    y = np.arange(len(stages))
    ax.barh(y, [timings[s] for s in stages], color=[STAGE_COLORS.get(s, "tab:gray") for s in stages])
    ax.set_yticks(y, stages)
    ax.set_xscale("log")
    ax.set_xlabel("seconds")
    ax.set_title(title)
    ax.invert_yaxis()
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return os.fspath(path)


def plot_grid(report, path) -> str:
    """Heat map of mean CV error over (log2 C, log2 gamma); best cell marked."""
    gammas = sorted({e.gamma for e in report.entries})
    Cs = sorted({e.C for e in report.entries})
    err = np.full((len(gammas), len(Cs)), np.nan)
    for e in report.entries:
        err[gammas.index(e.gamma), Cs.index(e.C)] = 100 * e.error
    fig, ax = _figure(width=1.0 + 0.6 * len(Cs), height=1.2 + 0.5 * len(gammas))
    im = ax.imshow(err, origin="lower", aspect="auto", cmap="viridis_r")
    ax.set_xticks(range(len(Cs)), [f"{np.log2(c):g}" for c in Cs])
    ax.set_yticks(range(len(gammas)), [f"{np.log2(g):g}" for g in gammas])
    ax.set_xlabel(r"$\log_2 C$")
    ax.set_ylabel(r"$\log_2 \gamma$")
    best = report.best
    ax.plot(Cs.index(best.C), gammas.index(best.gamma), marker="*", color="w", markersize=12)
    fig.colorbar(im, ax=ax, label="CV error (%)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
    return os.fspath(path)
