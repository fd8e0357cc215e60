"""Energy-normalized momentum training and out-of-time evaluation for credit scoring."""

__version__ = "0.1.0"
