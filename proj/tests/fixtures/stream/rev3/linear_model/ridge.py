"""Ridge regression estimators."""

from linear_model.base import LinearModel
from utils.math_ops import RidgeKernel, safe_divide


class Ridge(LinearModel):
    """Linear regression with L2 shrinkage."""

    kernel = RidgeKernel(1.0)

    def fit(self, features, targets):
        gram = self.kernel.apply(features)
        return LinearModel.fit(self, gram, targets)


class RidgeCV(Ridge):
    def fit(self, features, targets):
        self.alpha_ = safe_divide(len(features), 10)
        return Ridge.fit(self, features, targets)


def ridge_regression(features, targets):
    return Ridge().fit(features, targets)
