"""Exact alpha-beta divergences between discrete decomposable models."""

from .divergence import DEFAULT_GRID, alpha_beta_divergence, divergence_case, named_divergence
from .factor import Factor
from .functional import (
    Constant,
    FunctionalSpec,
    Power,
    build_computation_graph,
    evaluate_F,
    f1_assembled,
    f1_direct,
    f2,
    f3,
)
from .graph import DirectedGraph, UndirectedGraph, VariableTable
from .junction import build_forest, calibrate
from .model import BayesianNetwork, DecomposableModel, bn_to_dm, delete_edge, mle_fit

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_GRID", "alpha_beta_divergence", "divergence_case", "named_divergence",
    "Factor", "Constant", "FunctionalSpec", "Power", "build_computation_graph", "evaluate_F",
    "f1_assembled", "f1_direct", "f2", "f3", "DirectedGraph", "UndirectedGraph",
    "VariableTable", "build_forest", "calibrate", "BayesianNetwork", "DecomposableModel",
    "bn_to_dm", "delete_edge", "mle_fit", "__version__",
]
