"""Skin-temperature window statistics."""

from __future__ import annotations

import numpy as np

from .windowing import Window


def st_features(window: Window) -> dict:
    x = np.asarray(window.values, dtype=float)
    if len(x) == 0:
        return {}
    ordered = np.sort(x)
    return {
        "mean_c": float(np.mean(x)),
        # lower-middle element for even counts
        "median_c": float(ordered[(len(x) - 1) // 2]),
        "std_c": float(np.sqrt(np.mean((x - np.mean(x)) ** 2))),
        "max_c": float(np.max(x)),
        "min_c": float(np.min(x)),
    }
