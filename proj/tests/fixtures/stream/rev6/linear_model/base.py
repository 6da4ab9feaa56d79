"""Linear estimator scaffolding."""

import utils.numeric as ops
from core.base import BaseEstimator
from utils.validation import check_consistent_length


class LinearModel(BaseEstimator):
    """Ordinary least squares scaffold."""

    def fit(self, features, targets):
        check_consistent_length(features, targets)
        sums, moments = ops.solve_normal(features, targets)
        self.coef_ = [ops.safe_divide(value, len(sums)) for value in moments]
        return self

    def predict(self, features):
        return [self._decision(row) for row in features]

    def _decision(self, row):
        return sum(w * v for w, v in zip(self.coef_, row))
