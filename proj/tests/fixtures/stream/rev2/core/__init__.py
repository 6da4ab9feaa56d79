from .base import BaseEstimator
