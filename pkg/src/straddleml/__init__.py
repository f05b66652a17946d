"""Short-straddle trading decisions as a streaming binary-classification problem.

The package covers the full pipeline: market data ingestion, straddle
construction and settlement, feature building, a suite of from-scratch
probability-emitting classifiers, walk-forward evaluation with
validation-set threshold search, profit-aware metrics, and significance
reporting with plots.
"""

__version__ = "0.1.0"
