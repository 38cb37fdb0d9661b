"""Automated model selection with second-order categorical interactions."""

from .design import (
    DesignColumn,
    DesignMatrix,
    ModelSpec,
    Term,
    build_design,
    enumerate_terms,
    normalize_spec,
)
from .formula import FormulaError, parse_formula, render_formula
from .ols import FitSummary, fit, t_tail_two_sided
from .search import (
    PriorConfig,
    SearchTrace,
    StoppingRule,
    TraceRecord,
    aic_guard,
    backward_elimination,
    columns_to_formula,
    forward_selection,
    priority_search,
)
from .synthgen import (
    GroundTruth,
    default_ground_truth,
    generate,
    load_ground_truth,
    nonadditive_part,
    save_ground_truth,
    with_noise,
)
from .tabular import DataTable, Schema, load_csv, validate_table, write_csv

__version__ = "0.1.0"

__all__ = [
    "DataTable",
    "DesignColumn",
    "DesignMatrix",
    "FitSummary",
    "FormulaError",
    "GroundTruth",
    "ModelSpec",
    "PriorConfig",
    "Schema",
    "SearchTrace",
    "StoppingRule",
    "Term",
    "TraceRecord",
    "aic_guard",
    "backward_elimination",
    "build_design",
    "columns_to_formula",
    "default_ground_truth",
    "enumerate_terms",
    "fit",
    "forward_selection",
    "generate",
    "load_csv",
    "load_ground_truth",
    "nonadditive_part",
    "normalize_spec",
    "parse_formula",
    "priority_search",
    "render_formula",
    "save_ground_truth",
    "t_tail_two_sided",
    "validate_table",
    "with_noise",
    "write_csv",
]
