"""Config-driven experiment harness: catalog, runner, manifests, CLI."""

from .config import ConfigError, ExperimentConfig
from .experiments import EXPERIMENTS, default_config, load_config, run_experiment
from .manifest import RunManifest, load_manifest, verify_run
from .summary import LogFit, SummaryStat, final_sample_summary, logfit_entropy, quasi_steady_summary

__all__ = [
    "ConfigError",
    "ExperimentConfig",
    "EXPERIMENTS",
    "default_config",
    "load_config",
    "run_experiment",
    "RunManifest",
    "load_manifest",
    "verify_run",
    "LogFit",
    "SummaryStat",
    "final_sample_summary",
    "logfit_entropy",
    "quasi_steady_summary",
]
