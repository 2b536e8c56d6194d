"""Readers for the solver lab's CSV suite.

Each reader validates the column set up front and raises ``PlotDataError``
naming the missing column or the missing data, so the command-line tool can
exit nonzero with an actionable message. Values are passed through untouched;
the only interpretation is parsing decimals and recognising the literal
``inapplicable`` marker in bound tables.
"""

from __future__ import annotations

import csv
import os
from dataclasses import dataclass

import numpy as np

INAPPLICABLE = "inapplicable"


class PlotDataError(ValueError):
    """Missing file, missing column, or empty required data."""


def read_rows(path: str, required: tuple[str, ...]) -> list[dict]:
    """All rows of a CSV as dicts; fails naming the first missing column."""
    if not os.path.exists(path):
        raise PlotDataError(f"{path}: file not found")
    with open(path, newline="") as handle:
        reader = csv.DictReader(handle)
        header = reader.fieldnames or []
        for column in required:
            if column not in header:
                raise PlotDataError(f"{path}: missing column {column!r}")
        return list(reader)


@dataclass(frozen=True)
class Series:
    """One plottable curve: x positions, values, optional spread."""

    x: np.ndarray
    y: np.ndarray
    stderr: np.ndarray | None = None


def ehat_series(path: str) -> Series:
    """Per-iteration empirical error maxima from an ehat table."""
    rows = read_rows(path, ("k", "ehat", "stderr"))
    if not rows:
        raise PlotDataError(f"{path}: no error rows")
    k = np.array([int(r["k"]) for r in rows])
    order = np.argsort(k)
    return Series(x=k[order],
                  y=np.array([float(r["ehat"]) for r in rows])[order],
                  stderr=np.array([float(r["stderr"]) for r in rows])[order])


def bound_groups(path: str) -> dict[str, list[dict]]:
    """bounds.csv rows grouped by the ``kind`` column."""
    rows = read_rows(path, ("kind", "k", "n", "value"))
    groups: dict[str, list[dict]] = {}
    for row in rows:
        groups.setdefault(row["kind"], []).append(row)
    return groups


def is_applicable(rows: list[dict]) -> bool:
    return all(r["value"] != INAPPLICABLE for r in rows)


def per_iteration_curve(rows: list[dict]) -> Series:
    """Reduce bound rows to one value per iteration k.

    Lattice-valued kinds carry one row per (k, n); the curve takes the value
    at the largest node n of each iteration (the per-iteration maximum, since
    the bounds grow with n). Kinds already stored per k pass through.
    """
    best: dict[int, tuple[int, float]] = {}
    for row in rows:
        k = int(row["k"])
        n = int(row["n"]) if row["n"] != "" else -1
        value = float(row["value"])
        if k not in best or n > best[k][0]:
            best[k] = (n, value)
    ks = np.array(sorted(best))
    return Series(x=ks, y=np.array([best[k][1] for k in ks]))


def floor_value(groups: dict[str, list[dict]]) -> float:
    """The dt^(2q+1) noise-floor level recorded in bounds.csv (0 when none)."""
    rows = groups.get("noise_floor", [])
    if not rows:
        return 0.0
    return float(rows[0]["value"])


def moment_traces(path: str) -> list[tuple[str, Series, float | None]]:
    """Per-model (label, trace over k, analytic level) from moments.csv.

    Analytic levels are the rows with a blank ``k`` cell. Model order follows
    first appearance in the file, which the producer writes deterministically.
    """
    rows = read_rows(path, ("model", "k", "max_second_moment", "stderr"))
    if not rows:
        raise PlotDataError(f"{path}: no moment rows")
    order: list[str] = []
    traced: dict[str, list[tuple[int, float, float]]] = {}
    analytic: dict[str, float] = {}
    for row in rows:
        label = row["model"]
        if label not in traced:
            traced[label] = []
            order.append(label)
        if row["k"] == "":
            analytic[label] = float(row["max_second_moment"])
        else:
            traced[label].append((int(row["k"]), float(row["max_second_moment"]),
                                  float(row["stderr"])))
    out = []
    for label in order:
        pts = sorted(traced[label])
        series = Series(x=np.array([p[0] for p in pts]),
                        y=np.array([p[1] for p in pts]),
                        stderr=np.array([p[2] for p in pts]))
        out.append((label, series, analytic.get(label)))
    return out


def sweep_curves(path: str) -> list[tuple[str, Series]]:
    """Per-model mean-iterations-to-tolerance curves from sweep.csv."""
    rows = read_rows(path, ("model", "eps", "mean_k", "stderr"))
    if not rows:
        raise PlotDataError(
            f"{path}: no sweep rows (empty tolerance grid in the producing run)")
    order: list[str] = []
    grouped: dict[str, list[tuple[float, float, float]]] = {}
    for row in rows:
        label = row["model"]
        if label not in grouped:
            grouped[label] = []
            order.append(label)
        grouped[label].append((float(row["eps"]), float(row["mean_k"]),
                               float(row["stderr"])))
    out = []
    for label in order:
        pts = sorted(grouped[label])
        out.append((label, Series(x=np.array([p[0] for p in pts]),
                                  y=np.array([p[1] for p in pts]),
                                  stderr=np.array([p[2] for p in pts]))))
    return out
