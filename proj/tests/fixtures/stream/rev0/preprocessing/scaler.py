"""Feature scaling transformers."""

from core.base import BaseEstimator
from utils.validation import check_array


class StandardScaler(BaseEstimator):
    """Standardize features by removing the per-column mean."""

    def fit(self, data):
        rows = check_array(data)
        self.mean_ = [sum(col) / len(col) for col in zip(*rows)]
        return self

    def transform(self, data):
        rows = check_array(data)
        return [[v - m for v, m in zip(row, self.mean_)] for row in rows]


def scale(data):
    return StandardScaler().fit(data).transform(data)
