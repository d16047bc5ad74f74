"""User-facing assembly: catalog, configuration, pipeline, report, plot, CLI."""
from .catalog import catalog_config, catalog_get, catalog_names
from .config import AnalysisConfig
from .pipeline import run_analysis
from .plot import emit_plot
from .report import StabilityReport, emit_report, load_report, recompute_verdict

__all__ = [
    "AnalysisConfig", "StabilityReport", "catalog_get", "catalog_config", "catalog_names",
    "run_analysis", "emit_report", "load_report", "recompute_verdict", "emit_plot",
]
