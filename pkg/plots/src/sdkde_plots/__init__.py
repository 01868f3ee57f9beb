"""Figure rendering for sdkde experiment CSVs (read-only consumers)."""

from .reader import RASTER_COLUMNS, RESULTS_COLUMNS, SchemaError, load_raster, load_results
from .render import KINDS, PlotSpec, RenderResult, fitted_slope, render

__version__ = "0.1.0"

__all__ = [
    "KINDS",
    "PlotSpec",
    "RenderResult",
    "SchemaError",
    "RESULTS_COLUMNS",
    "RASTER_COLUMNS",
    "fitted_slope",
    "load_raster",
    "load_results",
    "render",
    "__version__",
]
