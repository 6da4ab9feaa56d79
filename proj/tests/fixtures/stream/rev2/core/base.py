"""Shared estimator plumbing."""


class BaseEstimator:
    """Base class for all estimators."""

    def get_params(self):
        return dict(self.__dict__)

    def set_params(self, **params):
        self.__dict__.update(params)
        return self
