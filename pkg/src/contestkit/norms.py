"""Distance functions used for neighborhoods and counterfactual ranking."""

import numpy as np

from .errors import ConfigurationError, SchemaError

NORM_TAGS = ("absolute", "euclidean", "normalized-euclidean", "chebyshev")


def distance(a, b, norm: str = "absolute", scales=None) -> float:
    """Distance between two feature vectors under a declared norm tag.

    normalized-euclidean divides each coordinate difference by its scale
    (typically a per-feature standard deviation); zero scales fall back to
    the raw difference so constant features still penalize changes.
    """
    a = np.asarray(a, dtype=float).ravel()
    b = np.asarray(b, dtype=float).ravel()
    if a.shape != b.shape:
        raise SchemaError(f"vectors of different dimension: {a.shape} vs {b.shape}")
    diff = a - b
    if norm == "absolute":
        if a.size != 1:
            raise SchemaError("absolute norm is defined for one-dimensional vectors")
        return float(abs(diff[0]))
    if norm == "euclidean":
        return float(np.sqrt(np.sum(diff**2)))
    if norm == "chebyshev":
        if scales is not None:
            diff = diff / np.asarray(scales, dtype=float)
        return float(np.max(np.abs(diff))) if diff.size else 0.0
    if norm == "normalized-euclidean":
        if scales is None:
            raise ConfigurationError("normalized-euclidean needs per-feature scales")
        s = np.asarray(scales, dtype=float)
        scaled = np.where(s > 0, diff / np.where(s > 0, s, 1.0), diff)
        return float(np.sqrt(np.sum(scaled**2)))
    raise ConfigurationError(f"unknown norm tag: {norm!r}")
