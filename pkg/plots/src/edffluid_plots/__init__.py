"""Publication-style convergence figures for edffluid experiment directories.

These scripts only render what the experiment harness wrote (meta.json,
fluid.csv, paths_n<k>.csv, summary.csv); nothing is resimulated here.
"""

from .figures import FigureSpec, PlotError, plot

__version__ = "0.1.0"

__all__ = ["FigureSpec", "PlotError", "plot", "__version__"]
