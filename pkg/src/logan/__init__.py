"""Testing individual mediators in high-dimensional Gaussian DAG models."""

__version__ = "0.1.0"

from .boolmat import ancestors, bool_add, bool_mult, bool_star, path_oracle, threshold_binary
from .dagfit import (
    NotearsDAG,
    NotearsSettings,
    PenalizedRegression,
    PenaltySpec,
    acyclicity,
    fit_notears,
    fit_penalized,
)
from .data import Dataset, DataError, read_csv, write_csv
from .mediate import (
    LoganSettings,
    MediatorSelector,
    MediatorTest,
    by_baseline,
    fdr_select,
    split,
    test_mediator,
    test_mediator_multisplit,
)
from .sem import (SemModel, ScenarioConfig, generate_scenario, mediation_strength, sample,
                  scenario_a_fixture, scenario_model)

__all__ = [
    "ancestors", "bool_add", "bool_mult", "bool_star", "path_oracle", "threshold_binary",
    "NotearsDAG", "NotearsSettings", "PenalizedRegression", "PenaltySpec", "acyclicity",
    "fit_notears", "fit_penalized", "Dataset", "DataError", "read_csv", "write_csv",
    "LoganSettings", "MediatorSelector", "MediatorTest", "by_baseline", "fdr_select", "split",
    "test_mediator", "test_mediator_multisplit", "SemModel", "ScenarioConfig",
    "generate_scenario", "mediation_strength", "sample", "scenario_a_fixture", "scenario_model",
]
