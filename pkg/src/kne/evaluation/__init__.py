"""Downstream evaluation: node classification and link prediction."""

from .edgesplit import EdgeSplit, edge_features, residual_graph, split_edges
from .logreg import LabeledDataset, LogRegModel, logreg_fit
from .metrics import auc, micro_f1
from .tasks import (
    ClassificationResult,
    LinkPredictionResult,
    link_prediction_auc,
    load_labels,
    run_classification,
    run_link_prediction,
)

__all__ = [
    "EdgeSplit",
    "edge_features",
    "residual_graph",
    "split_edges",
    "LabeledDataset",
    "LogRegModel",
    "logreg_fit",
    "auc",
    "micro_f1",
    "ClassificationResult",
    "LinkPredictionResult",
    "link_prediction_auc",
    "load_labels",
    "run_classification",
    "run_link_prediction",
]
