"""Publication-style figures from treebroadcast CSV outputs.

Consumes only the documented CSV schemas (series, trajectory, phase,
threshold); no numerical engine logic lives here.
"""

from .render import KINDS, PlotSpec, SchemaError, load_table, render

__version__ = "0.1.0"

__all__ = ["KINDS", "PlotSpec", "SchemaError", "load_table", "render"]
