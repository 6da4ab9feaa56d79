"""Regression quality metrics."""

from utils.numeric import safe_divide
from utils.validation import check_consistent_length


def mean_squared_error(expected, predicted):
    check_consistent_length(expected, predicted)
    total = sum((e - p) ** 2 for e, p in zip(expected, predicted))
    return safe_divide(total, len(expected))


def r2_score(expected, predicted):
    mean = safe_divide(sum(expected), len(expected))
    baseline = mean_squared_error(expected, [mean] * len(expected))
    return 1.0 - safe_divide(mean_squared_error(expected, predicted), baseline)
