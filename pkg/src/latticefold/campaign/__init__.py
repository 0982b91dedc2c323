from .analysis import (
    CORR_COLUMNS,
    CorrelationReport,
    best_record,
    load_events,
    pearson_corr,
    scatter_points,
    trajectory,
    write_correlation_csv,
    write_scatter_csv,
    write_trajectory_csv,
)
from .config import default_config, parse_config_file, resolve_config
from .dataset import dataset_record, generate_dataset, load_dataset_layouts
from .render import render_map

__all__ = [
    "CORR_COLUMNS",
    "CorrelationReport",
    "best_record",
    "dataset_record",
    "default_config",
    "generate_dataset",
    "load_dataset_layouts",
    "load_events",
    "parse_config_file",
    "pearson_corr",
    "render_map",
    "resolve_config",
    "scatter_points",
    "trajectory",
    "write_correlation_csv",
    "write_scatter_csv",
    "write_trajectory_csv",
]
