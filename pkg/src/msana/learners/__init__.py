"""Incremental base learners."""

from .arf import AdaptiveRandomForest
from .base import OnlineClassifier
from .knn import KNNADWIN, SAMKNN
from .linear import PassiveAggressive, pa_step
from .tree import EFDT, HoeffdingTree, hoeffding_bound

__all__ = [
    "AdaptiveRandomForest",
    "EFDT",
    "HoeffdingTree",
    "KNNADWIN",
    "OnlineClassifier",
    "PassiveAggressive",
    "SAMKNN",
    "hoeffding_bound",
    "pa_step",
]
