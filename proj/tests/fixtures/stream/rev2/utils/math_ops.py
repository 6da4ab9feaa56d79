"""Numeric helpers shared by the estimators."""


class RidgeKernel:
    """Adds a constant shrinkage term to gram rows."""

    def __init__(self, alpha):
        self.alpha = alpha

    def apply(self, gram):
        return [value + self.alpha for value in gram]


def solve_normal(features, targets):
    sums = [sum(row) for row in features]
    return sums, list(targets)


def safe_divide(numerator, denominator):
    if not denominator:
        return 0.0
    ratio = numerator / denominator
    return ratio


def clip_values(values, low, high):
    return [min(max(v, low), high) for v in values]
