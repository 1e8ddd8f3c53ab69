"""Nonnegative latent factor recovery for sparse matrices.

A density-weighted alternating-direction solver learns nonnegative factor
matrices from the known entries of a large sparse matrix, with optional
online adaptation of its two hyper-parameters by a particle swarm, plus
the supporting data handling, metrics, and a ten-fold evaluation CLI.
"""

from .admm import (
    FactorState,
    HyperParams,
    IterationRecord,
    TerminationPolicy,
    TerminationReason,
    TrainReport,
    check_termination,
    init_state,
    predict,
    predict_entries,
    project_a_column,
    project_x_column,
    train_fixed,
    train_iteration,
    update_h_column,
    update_p_column,
    update_w_column,
    update_z_column,
)
from .data import (
    DatasetSplit,
    Entry,
    HdiMatrix,
    density,
    parse_ratings,
    ten_fold_splits,
)
from .errors import ConfigError, DomainError, NlfaError, NumericError, ParseError
from .metrics import MetricResult, mae, rmse
from .model_io import load_model, save_model
from .swarm import (
    Particle,
    Swarm,
    SwarmConfig,
    adaptive_train,
    evolve_particle,
    init_swarm,
    measure_and_update,
)

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DatasetSplit",
    "DomainError",
    "Entry",
    "FactorState",
    "HdiMatrix",
    "HyperParams",
    "IterationRecord",
    "MetricResult",
    "NlfaError",
    "NumericError",
    "ParseError",
    "Particle",
    "Swarm",
    "SwarmConfig",
    "TerminationPolicy",
    "TerminationReason",
    "TrainReport",
    "adaptive_train",
    "check_termination",
    "density",
    "evolve_particle",
    "init_state",
    "init_swarm",
    "load_model",
    "mae",
    "measure_and_update",
    "parse_ratings",
    "predict",
    "predict_entries",
    "project_a_column",
    "project_x_column",
    "rmse",
    "save_model",
    "ten_fold_splits",
    "train_fixed",
    "train_iteration",
    "update_h_column",
    "update_p_column",
    "update_w_column",
    "update_z_column",
]
