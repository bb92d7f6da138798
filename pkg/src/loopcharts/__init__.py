"""Star expressions as processes: charts, 1-charts and loop structure."""

from .bisim import are_bisimilar, bisimilarity, collapse
from .chart import Chart, LabeledChart, induced_chart, make_chart
from .expr import parse_expr
from .extract import extract, verify_extraction
from .interp import chart_interp, labeled_interp, one_chart_interp
from .lee import lee_check, verify_llee_witness

__version__ = "0.1.0"

__all__ = [
    "Chart", "LabeledChart", "are_bisimilar", "bisimilarity", "chart_interp",
    "collapse", "extract", "induced_chart", "labeled_interp", "lee_check",
    "make_chart", "one_chart_interp", "parse_expr", "verify_extraction",
    "verify_llee_witness",
]
