from .base import LinearModel
from .ridge import Ridge, ridge_regression
