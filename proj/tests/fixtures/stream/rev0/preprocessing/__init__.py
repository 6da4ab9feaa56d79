from .scaler import StandardScaler, scale
from .encoder import LabelEncoder
