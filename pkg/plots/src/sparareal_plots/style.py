"""Data-driven style table.

Every series drawn by the renderer looks its style up here by model label or
bound kind; no figure builder hard-codes a color. Sampling rules keep one
color each across every figure (light blue / brown / purple / green), bound
curves keep one color per bound family, and state-independent noise models
are drawn as dashed black lines distinguished by marker.
"""

from __future__ import annotations

# color + line style per sampling-rule label
RULE_STYLES: dict[str, dict] = {
    "rule1": {"color": "#74b3e3", "linestyle": "-"},   # light blue
    "rule2": {"color": "#8c564b", "linestyle": "-"},   # brown
    "rule3": {"color": "#9467bd", "linestyle": "-"},   # purple
    "rule4": {"color": "#2ca02c", "linestyle": "-"},   # green
}

# state-independent families: dashed black, markers cycle by q for legibility
STATE_INDEP_STYLE: dict = {"color": "black", "linestyle": "--"}
STATE_INDEP_MARKERS: tuple[str, ...] = ("o", "s", "^", "v", "D", "x")

# bound kinds as written in bounds.csv
BOUND_STYLES: dict[str, dict] = {
    "superlinear": {"color": "#1f77b4", "linestyle": "-"},
    "linear": {"color": "#d62728", "linestyle": "-"},
    "numeric_recursion_24": {"color": "#1f77b4", "linestyle": "-"},
    "numeric_recursion_13": {"color": "#1f77b4", "linestyle": "-"},
    "rule24": {"color": "#d62728", "linestyle": "-"},
    "rule13": {"color": "#d62728", "linestyle": "-"},
    "noise_floor": {"color": "black", "linestyle": "--"},
}

EMPIRICAL_STYLE: dict = {"color": "black", "linestyle": "-", "marker": "o",
                         "markersize": 4}

BOUND_LABELS: dict[str, str] = {
    "superlinear": "superlinear bound",
    "linear": "linear bound",
    "numeric_recursion_24": "numeric recursion",
    "numeric_recursion_13": "numeric recursion",
    "rule24": "linear rule bound",
    "rule13": "linear rule bound",
    "noise_floor": "noise floor",
}

# fixed rendering parameters so identical inputs give identical bytes
RC_PARAMS: dict = {
    "figure.figsize": (5.2, 4.0),
    "figure.dpi": 110,
    "savefig.dpi": 110,
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "lines.linewidth": 1.4,
    "svg.hashsalt": "sparareal-plots",
}


def model_style(label: str, marker_index: int = 0) -> dict:
    """Line style for a model label from the CSV ``model`` column."""
    if label in RULE_STYLES:
        return dict(RULE_STYLES[label])
    style = dict(STATE_INDEP_STYLE)
    style["marker"] = STATE_INDEP_MARKERS[marker_index % len(STATE_INDEP_MARKERS)]
    style["markersize"] = 3.5
    return style
