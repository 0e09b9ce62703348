"""Experiment runner: repeated trials, anytime profiles and reports."""

from .config import ExperimentConfig, load_config
from .runner import (
    ExperimentError,
    ProfileReport,
    QualityReport,
    contract_quality_run,
    improvement_factor,
    run_experiment,
)
