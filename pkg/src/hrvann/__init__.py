"""HRV feature extraction and backprop ANN classification of ischemic heart disease."""

__version__ = "0.1.0"
