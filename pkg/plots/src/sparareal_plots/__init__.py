"""Batch renderer turning the solver lab's CSV suite into figure files.

The package consumes only the CSV schemas written by the ``sparareal``
command-line tool (treated as a frozen contract) and never recomputes or
reinterprets the data: the only transformation applied is masking non-positive
cells on logarithmic axes.
"""

from .data import PlotDataError
from .figures import PRESETS, FigureSpec, build_spec, render

__all__ = ["PlotDataError", "PRESETS", "FigureSpec", "build_spec", "render"]
