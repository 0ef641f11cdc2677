"""
SU Learning
Binary classification from similar pairs and unlabeled data
"""

from su_learning.classifier import SUClassifier, evaluate
from su_learning.errors import DataError, NumericalError, SULearningError

__version__ = "1.0.0"

__all__ = ["DataError", "NumericalError", "SUClassifier", "SULearningError", "evaluate"]
