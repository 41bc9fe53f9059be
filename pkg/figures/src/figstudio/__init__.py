"""Figure rendering for zaklab run directories.

Consumes only the persisted run artifacts (manifest.json, results.csv,
series.jsonl): fitted slopes are read from the result files verbatim and
never recomputed, so the simulation suite stays fully testable without
this package.
"""

__version__ = "0.1.0"

from .jobs import FigureJob, FigureDataError
from .render import render, FIGURE_KINDS
