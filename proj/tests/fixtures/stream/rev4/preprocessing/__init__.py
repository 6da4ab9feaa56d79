from .scaler import StandardScaler, scale
