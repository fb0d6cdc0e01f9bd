from .base import Standardizer, check_binary_labels
from .classical import (
    DecisionTree,
    GradientBoostingModel,
    LogisticModel,
    RandomForestModel,
)
from .svm import QsvmModel, smo_solve
from .quantum import QnnModel, VqeModel
from .hybrid import (
    QasaHybridModel,
    QasaSequenceModel,
    QuantumRwkvModel,
    TransformerModel,
    build_windows,
)

__all__ = [
    "DecisionTree",
    "GradientBoostingModel",
    "LogisticModel",
    "QasaHybridModel",
    "QasaSequenceModel",
    "QnnModel",
    "QsvmModel",
    "QuantumRwkvModel",
    "RandomForestModel",
    "Standardizer",
    "TransformerModel",
    "VqeModel",
    "build_windows",
    "check_binary_labels",
    "smo_solve",
]
