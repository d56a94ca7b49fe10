from ccqme.cli.config import ExperimentConfig, load_config, parse_config
from ccqme.cli.io import ReferenceTrajectory, compare_observable, load_reference, read_csv, write_csv

__all__ = [
    "ExperimentConfig",
    "ReferenceTrajectory",
    "compare_observable",
    "load_config",
    "load_reference",
    "parse_config",
    "read_csv",
    "write_csv",
]
