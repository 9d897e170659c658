"""Figure rendering for beamforming sweep results."""

from .render import FigureKind, FigureSpec, PlotDataError, build_figure, render

__all__ = ["FigureKind", "FigureSpec", "PlotDataError", "build_figure",
           "render"]
