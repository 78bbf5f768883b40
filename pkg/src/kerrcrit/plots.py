"""Figure rendering for the report path.

Every sweep and raster writes a delimited data file; these helpers render
the matching figure next to it. SVG output with a fixed hash salt keeps
reruns as close to byte-stable as the backend allows (the data files are
the normative artifacts).
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

plt.rcParams["svg.hashsalt"] = "kerrcrit"
plt.rcParams["figure.figsize"] = (4.2, 3.2)
plt.rcParams["font.size"] = 9

_SAVE_KW = dict(bbox_inches="tight", metadata={"Date": None})


def render_curve(path, x, ys: dict[str, np.ndarray], xlabel: str,
                 ylabel: str, logy: bool = False, vlines=()):
    fig, ax = plt.subplots()
    for label, y in ys.items():
        y = np.asarray(y, dtype=float)
        mask = np.isfinite(y)
        ax.plot(np.asarray(x)[mask], y[mask], lw=1.2, label=label)
    for xv in vlines:
        ax.axvline(xv, color="k", ls="-.", lw=0.8)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    if len(ys) > 1:
        ax.legend(fontsize=7, frameon=False)
    ax.tick_params(direction="in", top=True, right=True)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def render_heatmap(path, x, y, values, xlabel: str, ylabel: str,
                   clabel: str, diverging: bool = False, lognorm: bool = False):
    fig, ax = plt.subplots()
    values = np.asarray(values, dtype=float)
    kw = {}
    if diverging:
        vmax = np.nanmax(np.abs(values))
        kw = dict(cmap="RdBu_r", vmin=-vmax, vmax=vmax)
    elif lognorm:
        from matplotlib.colors import LogNorm
        positive = values[np.isfinite(values) & (values > 0)]
        if positive.size:
            kw = dict(norm=LogNorm(vmin=positive.min(), vmax=positive.max()))
    mesh = ax.pcolormesh(x, y, values, shading="auto", **kw)
    fig.colorbar(mesh, ax=ax, label=clabel)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def render_wigner(path, grid):
    render_heatmap(path, grid.x_axis, grid.y_axis, grid.values,
                   "x", "y", "W(x, y)", diverging=True)
