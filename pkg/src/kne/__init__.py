"""Kernelized random-walk node embeddings with an evaluation harness."""

from .backend import BACKEND, HAVE_COMPILED
from .errors import DataError, KneError, NumericalError
from .graph import Graph, largest_connected_component, load_edge_list
from .kernels import KernelSpec, kernel_eval, kernel_grad_x
from .train import (
    EmbeddingModel,
    TrainConfig,
    export_embeddings,
    import_embeddings,
    init_model,
    train,
)
from .walks import WalkConfig, WalkCorpus, context_pairs, generate_walks, occurrence_frequencies

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "HAVE_COMPILED",
    "DataError",
    "KneError",
    "NumericalError",
    "Graph",
    "largest_connected_component",
    "load_edge_list",
    "KernelSpec",
    "kernel_eval",
    "kernel_grad_x",
    "EmbeddingModel",
    "TrainConfig",
    "export_embeddings",
    "import_embeddings",
    "init_model",
    "train",
    "WalkConfig",
    "WalkCorpus",
    "context_pairs",
    "generate_walks",
    "occurrence_frequencies",
    "__version__",
]
