"""Classifiers, metrics, and the cross-validation harness."""

from .crossval import CvReport, ReduceSpec, cross_validate
from .gbt import ContributionReport, GbtConfig, GradientBoostedTrees
from .logreg import LogisticRegression
from .metrics import METRIC_NAMES, evaluate
from .tree import DecisionTreeClassifier, RandomForestClassifier

__all__ = [
    "CvReport",
    "ReduceSpec",
    "cross_validate",
    "ContributionReport",
    "GbtConfig",
    "GradientBoostedTrees",
    "LogisticRegression",
    "METRIC_NAMES",
    "evaluate",
    "DecisionTreeClassifier",
    "RandomForestClassifier",
]
