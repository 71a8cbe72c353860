"""The five figure kinds, one function each, plus a small spec dispatcher.

Error-bound fields span many orders of magnitude, so they always go on a
logarithmic scale with non-positive and masked cells left as gaps. Figure
size, style and marker conventions are fixed so identical inputs yield
identical images.
"""

from dataclasses import dataclass, field

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LogNorm

from .csvio import MissingColumnError, read_columns

__all__ = ["FigureSpec", "KINDS", "render_spec", "render_contour",
           "render_line", "render_pareto", "render_scheme", "render_dqn"]

KINDS = ("contour", "line", "pareto", "scheme", "dqn")
LOG_FIELDS = {"speb", "soeb"}
DPI = 150

# Deployment overlay conventions, shared by every map.
_NODE_STYLE = {
    "dl_rru": dict(marker="v", color="tab:red", label="DL RRU"),
    "ul_rru": dict(marker="^", color="tab:blue", label="UL RRU"),
    "dl_user": dict(marker="o", color="black", label="DL user"),
    "ul_user": dict(marker="s", color="dimgray", label="UL user"),
    "target": dict(marker="*", color="gold", markersize=14, label="target",
                   markeredgecolor="black"),
}


@dataclass
class FigureSpec:
    """One figure to render: kind, input artifact(s), output image."""

    kind: str
    input: str
    out: str
    layout: str | None = None
    value: str = "speb"
    title: str | None = None
    extra: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ValueError(
                f"unknown figure kind {self.kind!r}, expected one of "
                f"{', '.join(KINDS)}"
            )


def render_spec(spec: FigureSpec) -> str:
    if spec.kind == "contour":
        return render_contour(spec.input, spec.layout, spec.out,
                              value=spec.value, title=spec.title)
    if spec.kind == "line":
        return render_line(spec.input, spec.out, value=spec.value,
                           title=spec.title)
    if spec.kind == "pareto":
        return render_pareto(spec.input, spec.out, title=spec.title)
    if spec.kind == "scheme":
        return render_scheme(spec.input, spec.out, title=spec.title)
    return render_dqn(spec.input, spec.out, title=spec.title)


def _positive_masked(values: np.ndarray, name: str) -> np.ma.MaskedArray:
    """Mask NaN and non-positive entries; a log axis needs what is left."""
    masked = np.ma.masked_invalid(np.asarray(values, dtype=float))
    masked = np.ma.masked_less_equal(masked, 0.0)
    if masked.count() == 0:
        raise ValueError(
            f"field '{name}' has no positive finite values to plot on a "
            "logarithmic scale"
        )
    return masked


def _save(fig, out: str) -> str:
    fig.savefig(out, dpi=DPI)
    plt.close(fig)
    return out


def render_contour(contour_csv, layout_csv, out, value: str = "speb",
                   title: str | None = None) -> str:
    """Heatmap of an error-bound field with the deployment drawn on top.

    Cells the simulator masked arrive as empty fields and stay blank here.
    The color scale is logarithmic.
    """
    cols = read_columns(contour_csv, required=("x", "y", "mask", value))
    xs, ys = np.unique(cols["x"]), np.unique(cols["y"])
    grid = np.full((ys.size, xs.size), np.nan)
    grid[np.searchsorted(ys, cols["y"]),
         np.searchsorted(xs, cols["x"])] = cols[value]
    masked = _positive_masked(grid, value)

    fig, ax = plt.subplots(figsize=(7.0, 6.0))
    mesh = ax.pcolormesh(xs, ys, masked,
                         norm=LogNorm(vmin=masked.min(), vmax=masked.max()),
                         shading="nearest", cmap="viridis")
    fig.colorbar(mesh, ax=ax, label=value)

    if layout_csv is not None:
        nodes = read_columns(layout_csv, required=("kind", "x", "y"))
        for kind, style in _NODE_STYLE.items():
            sel = nodes["kind"] == kind
            if np.any(sel):
                ax.plot(nodes["x"][sel], nodes["y"][sel], linestyle="none",
                        **style)
        ax.legend(loc="upper right", fontsize=8, framealpha=0.9)

    ax.set_xlabel("x [m]")
    ax.set_ylabel("y [m]")
    ax.set_aspect("equal")
    ax.set_title(title or f"{value} over candidate target positions")
    return _save(fig, out)


def render_line(sweep_csv, out, value: str = "speb",
                title: str | None = None) -> str:
    """Sweep curves, one line per antenna count."""
    cols = read_columns(sweep_csv,
                        required=("variable", "value", "n_antennas", value))
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    for n in np.unique(cols["n_antennas"]):
        sel = cols["n_antennas"] == n
        order = np.argsort(cols["value"][sel])
        ax.plot(cols["value"][sel][order], cols[value][sel][order],
                marker="o", label=f"{int(n)} antennas")
    if value in LOG_FIELDS:
        _positive_masked(cols[value], value)
        ax.set_yscale("log")
    ax.set_xlabel(f"{cols['variable'][0]} share")
    ax.set_ylabel(value)
    ax.legend()
    ax.grid(True, alpha=0.3)
    ax.set_title(title or f"{value} vs {cols['variable'][0]} share")
    return _save(fig, out)


def render_pareto(pareto_csv, out, title: str | None = None) -> str:
    """Rate/sensing trade-off: evolved front, equal split, agent's best.

    The sensing objective lives on a log axis; the front is drawn in f1
    order so the trade-off reads left to right.
    """
    cols = read_columns(pareto_csv, required=("source", "f1", "f2"))
    fig, ax = plt.subplots(figsize=(6.4, 4.8))

    sel = cols["source"] == "front"
    if np.any(sel):
        order = np.argsort(cols["f1"][sel])
        ax.plot(cols["f1"][sel][order], cols["f2"][sel][order], marker=".",
                markersize=4, linewidth=1.0, color="tab:blue",
                label="evolved front")
    for source, style in (("epa", dict(marker="D", color="tab:red",
                                       label="equal split")),
                          ("dqn", dict(marker="P", color="tab:green",
                                       label="agent best"))):
        sel = cols["source"] == source
        if np.any(sel):
            ax.plot(cols["f1"][sel], cols["f2"][sel], linestyle="none",
                    markersize=9, **style)
    _positive_masked(cols["f2"], "f2")
    ax.set_yscale("log")
    ax.set_xlabel("weighted sum rate f1")
    ax.set_ylabel("sensing objective f2")
    ax.legend()
    ax.grid(True, alpha=0.3)
    ax.set_title(title or "power allocation trade-off")
    return _save(fig, out)


def render_scheme(schemes_csv, out, title: str | None = None) -> str:
    """Rate and error bound of each duplexing architecture vs slot length."""
    cols = read_columns(schemes_csv,
                        required=("scheme", "sensing_symbols", "sum_rate",
                                  "speb"))
    # First-appearance order keeps the legend stable across runs.
    names = list(dict.fromkeys(cols["scheme"]))
    fig, (ax_rate, ax_speb) = plt.subplots(2, 1, figsize=(6.4, 7.2),
                                           sharex=True)
    for name in names:
        sel = cols["scheme"] == name
        order = np.argsort(cols["sensing_symbols"][sel])
        s = cols["sensing_symbols"][sel][order]
        ax_rate.plot(s, cols["sum_rate"][sel][order], marker="o", label=name)
        ax_speb.plot(s, cols["speb"][sel][order], marker="o", label=name)
    _positive_masked(cols["speb"], "speb")
    ax_speb.set_yscale("log")
    ax_rate.set_ylabel("sum rate")
    ax_speb.set_ylabel("speb")
    ax_speb.set_xlabel("sensing symbols per block")
    ax_rate.legend()
    for ax in (ax_rate, ax_speb):
        ax.grid(True, alpha=0.3)
    ax_rate.set_title(title or "duplexing architectures")
    return _save(fig, out)


def render_dqn(trace_csv, out, title: str | None = None) -> str:
    """Training trace: per-episode mean reward and the best seen so far."""
    cols = read_columns(trace_csv,
                        required=("episode", "mean_reward", "best_reward"))
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    ax.plot(cols["episode"], cols["mean_reward"], label="episode mean")
    ax.plot(cols["episode"], cols["best_reward"], label="best so far")
    ax.set_xlabel("episode")
    ax.set_ylabel("reward")
    ax.legend()
    ax.grid(True, alpha=0.3)
    ax.set_title(title or "agent training")
    return _save(fig, out)
