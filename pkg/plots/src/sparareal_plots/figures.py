"""Figure presets and rendering.

Each preset names the CSV files it consumes and the panel that draws them:

* error panels (state-independent noise): empirical per-iteration error with
  superlinear / linear bound overlays and a dashed noise-floor line;
* error panels (sampling rules): empirical errors for a rule pair with the
  numeric-recursion curve and, when applicable, the linear rule bound;
* moment traces: largest perturbation second moments per iteration;
* tolerance sweeps: mean iterations to tolerance against the tolerance grid.

Rendering is deterministic: a fixed style table, fixed figure geometry, and
image metadata stripped of anything time- or host-dependent, so rerendering
identical CSVs produces identical bytes.
"""

from __future__ import annotations

import os
from dataclasses import dataclass

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)

from . import style
from .data import (
    PlotDataError,
    Series,
    bound_groups,
    ehat_series,
    floor_value,
    is_applicable,
    moment_traces,
    per_iteration_curve,
    sweep_curves,
)


@dataclass(frozen=True)
class FigureSpec:
    """One renderable figure: preset, inputs, layout, styling, output."""

    preset: str
    csv_paths: tuple[str, ...]
    panel: str                      # state_independent | rule_pair | moments | sweep
    rules: tuple[int, ...]          # rule_pair panels only
    styles: dict
    out_path: str


# preset -> (panel kind, rules). The CSV sets mirror what the solver lab's
# `experiment --preset NAME` command writes for the same preset name.
PRESETS: dict[str, tuple[str, tuple[int, ...]]] = {
    "fig2a": ("state_independent", ()),
    "fig2b": ("state_independent", ()),
    "fig2c": ("state_independent", ()),
    "fig3a": ("state_independent", ()),
    "fig3b": ("state_independent", ()),
    "fig3c": ("state_independent", ()),
    "fig4": ("moments", ()),
    "fig5a": ("rule_pair", (2, 4)),
    "fig5b": ("rule_pair", (1, 3)),
    "fig6": ("sweep", ()),
    "fig7a": ("state_independent", ()),
    "fig7b": ("state_independent", ()),
    "fig7c": ("state_independent", ()),
    "fig8a": ("rule_pair", (2, 4)),
    "fig8b": ("rule_pair", (1, 3)),
    "fig9": ("sweep", ()),
}


def build_spec(preset: str, csv_dir: str, out_path: str) -> FigureSpec:
    """Resolve a preset name to the figure spec over files in ``csv_dir``."""
    if preset not in PRESETS:
        raise PlotDataError(f"unknown preset {preset!r}; choose from "
                            + ", ".join(sorted(PRESETS)))
    panel, rules = PRESETS[preset]
    join = lambda name: os.path.join(csv_dir, name)  # noqa: E731
    if panel == "state_independent":
        paths = (join("ehat.csv"), join("bounds.csv"))
    elif panel == "rule_pair":
        paths = tuple(join(f"ehat_rule{r}.csv") for r in rules) + (join("bounds.csv"),)
    elif panel == "moments":
        paths = (join("moments.csv"),)
    else:
        paths = (join("sweep.csv"),)
    styles = {"models": style.RULE_STYLES, "bounds": style.BOUND_STYLES,
              "empirical": style.EMPIRICAL_STYLE}
    return FigureSpec(preset=preset, csv_paths=paths, panel=panel,
                      rules=rules, styles=styles, out_path=out_path)


def _masked(series: Series) -> tuple[np.ndarray, np.ndarray]:
    """Drop non-positive cells so the curve is drawable on a log axis."""
    keep = np.isfinite(series.y) & (series.y > 0)
    return series.x[keep], series.y[keep]


def _plot_log(ax, series: Series, label: str, **kwargs) -> None:
    x, y = _masked(series)
    if x.size:
        ax.plot(x, y, label=label, **kwargs)


def _finish(ax, xlabel: str, ylabel: str, logy: bool = True) -> None:
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(loc="best")


def _draw_state_independent(spec: FigureSpec, ax) -> None:
    ehat_path, bounds_path = spec.csv_paths
    groups = bound_groups(bounds_path)
    for kind in ("superlinear", "linear"):
        rows = groups.get(kind)
        if rows and is_applicable(rows):
            _plot_log(ax, per_iteration_curve(rows), style.BOUND_LABELS[kind],
                      **style.BOUND_STYLES[kind])
    k1 = groups.get("k1")
    if k1:
        curve = per_iteration_curve(k1)
        _plot_log(ax, curve, "first-iteration bound",
                  marker="s", markersize=4, linestyle="none",
                  color=style.BOUND_STYLES["superlinear"]["color"])
    _plot_log(ax, ehat_series(ehat_path), "empirical error",
              **style.EMPIRICAL_STYLE)
    floor = floor_value(groups)
    if floor > 0:
        ax.axhline(floor, label=style.BOUND_LABELS["noise_floor"],
                   **style.BOUND_STYLES["noise_floor"])
    _finish(ax, "iteration k", "mean-square error")


def _draw_rule_pair(spec: FigureSpec, ax) -> None:
    *ehat_paths, bounds_path = spec.csv_paths
    groups = bound_groups(bounds_path)
    suffix = "24" if 2 in spec.rules else "13"
    recursion = groups.get(f"numeric_recursion_{suffix}")
    if recursion:
        _plot_log(ax, per_iteration_curve(recursion),
                  style.BOUND_LABELS[f"numeric_recursion_{suffix}"],
                  **style.BOUND_STYLES[f"numeric_recursion_{suffix}"])
    rule_rows = groups.get(f"rule{suffix}")
    if rule_rows and is_applicable(rule_rows):
        _plot_log(ax, per_iteration_curve(rule_rows),
                  style.BOUND_LABELS[f"rule{suffix}"],
                  **style.BOUND_STYLES[f"rule{suffix}"])
    for rule, path in zip(spec.rules, ehat_paths):
        _plot_log(ax, ehat_series(path), f"rule {rule}",
                  marker="o", markersize=3.5, **style.RULE_STYLES[f"rule{rule}"])
    _finish(ax, "iteration k", "mean-square error")


def _draw_moments(spec: FigureSpec, ax) -> None:
    marker_index = 0
    for label, series, analytic in moment_traces(spec.csv_paths[0]):
        sty = style.model_style(label, marker_index)
        if label not in style.RULE_STYLES:
            marker_index += 1
        _plot_log(ax, series, label, **sty)
        if analytic is not None and analytic > 0:
            ax.axhline(analytic, color=sty["color"], linestyle=":",
                       linewidth=0.9)
    _finish(ax, "iteration k", "max perturbation second moment")


def _draw_sweep(spec: FigureSpec, ax) -> None:
    marker_index = 0
    for label, series in sweep_curves(spec.csv_paths[0]):
        sty = style.model_style(label, marker_index)
        if label not in style.RULE_STYLES:
            marker_index += 1
        else:
            sty.update(marker="o", markersize=3.5)
        keep = np.isfinite(series.y)
        ax.plot(series.x[keep], series.y[keep], label=label, **sty)
    ax.set_xscale("log")
    ax.invert_xaxis()
    _finish(ax, "tolerance", "mean iterations to tolerance", logy=False)


_PANELS = {
    "state_independent": _draw_state_independent,
    "rule_pair": _draw_rule_pair,
    "moments": _draw_moments,
    "sweep": _draw_sweep,
}


def build_figure(spec: FigureSpec):
    """Draw the preset into a new matplotlib figure (no file output)."""
    with plt.rc_context(style.RC_PARAMS):
        fig, ax = plt.subplots()
        try:
            _PANELS[spec.panel](spec, ax)
            ax.set_title(spec.preset)
            fig.tight_layout()
        except Exception:
            plt.close(fig)
            raise
    return fig


def _metadata_for(path: str) -> dict:
    """Strip writer metadata that would vary between runs."""
    ext = os.path.splitext(path)[1].lower()
    if ext == ".svg":
        return {"Date": None}
    if ext in (".pdf", ".ps", ".eps"):
        return {"CreationDate": None}
    return {"Software": None}


def render(spec: FigureSpec) -> None:
    """Render the spec and write the image file (atomically)."""
    fig = build_figure(spec)
    tmp = spec.out_path + ".tmp" + os.path.splitext(spec.out_path)[1]
    try:
        fig.savefig(tmp, metadata=_metadata_for(spec.out_path))
        os.replace(tmp, spec.out_path)
    finally:
        plt.close(fig)
        if os.path.exists(tmp):
            os.remove(tmp)
