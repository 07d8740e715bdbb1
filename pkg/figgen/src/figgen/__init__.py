"""figgen: plots for caplab CSV output."""

from .render import ColumnError, RenderResult, load_fig3, load_overlay, render_fig3

__version__ = "0.1.0"

__all__ = [
    "ColumnError",
    "RenderResult",
    "load_fig3",
    "load_overlay",
    "render_fig3",
]
