"""Static figures from nafd-isac CSV artifacts. Read-only over the CSVs."""

from .csvio import MissingColumnError, read_columns
from .render import (KINDS, FigureSpec, render_contour, render_dqn,
                     render_line, render_pareto, render_scheme, render_spec)

__version__ = "0.1.0"

__all__ = ["MissingColumnError", "read_columns", "KINDS", "FigureSpec",
           "render_contour", "render_dqn", "render_line", "render_pareto",
           "render_scheme", "render_spec"]
