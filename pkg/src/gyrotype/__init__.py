"""Gesture-to-text decoding from 3-axis gyroscope streams.

The pipeline: energy-based segmentation (signal_core) -> DTW 1-NN gesture
recognition with noise rejection (recognizer) -> ambiguous-keyboard Bayesian
word decoding (text_decoder), plus an evaluation harness (eval_harness) and a
local streaming service (gateway).
"""


class RejectedInput(ValueError):
    """Raised when an operation receives input that violates its contract."""


class NotReady(RuntimeError):
    """Raised when a model or store is used before it holds enough data."""
