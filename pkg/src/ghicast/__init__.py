"""Hours-ahead GHI forecasting from spatial graph embeddings, temporal embeddings
and weather features with a bagged regression-tree ensemble."""

__version__ = "0.1.0"
