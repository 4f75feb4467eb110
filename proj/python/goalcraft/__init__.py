"""Goal-conditioned value networks: bilinear and baseline critics, DDPG+HER on 2D tasks."""

from goalcraft._core import (
    ConfigError,
    ContractError,
    Critic,
    IoError,
    NumericalError,
    ShapeError,
    angle_deg,
    bootstrap_ci,
    canonical_config,
    config_hash,
    is_free,
    load_checkpoint,
    matched_width,
    pca_fit,
    run_cli,
    step,
    variants,
    version,
)

__version__ = version()

__all__ = [
    "ConfigError",
    "ContractError",
    "Critic",
    "IoError",
    "NumericalError",
    "ShapeError",
    "angle_deg",
    "bootstrap_ci",
    "canonical_config",
    "config_hash",
    "is_free",
    "load_checkpoint",
    "matched_width",
    "pca_fit",
    "run_cli",
    "step",
    "variants",
    "version",
]
