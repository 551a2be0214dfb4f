"""Reproducible quasi-random sampling of state boxes."""

from __future__ import annotations

import warnings

import numpy as np
from scipy.stats import qmc


def sample_box(box, count: int, seed: int = 0) -> np.ndarray:
    """``count`` scrambled Sobol points inside ``box`` (rows are states)."""
    box = np.asarray(box, dtype=float)
    if count < 1:
        raise ValueError("sample count must be at least 1")
    d = box.shape[0]
    sampler = qmc.Sobol(d=d, scramble=True, seed=seed)
    with warnings.catch_warnings():
        # balance properties of Sobol sequences only hold for powers of two
        warnings.simplefilter("ignore", UserWarning)
        u = sampler.random(count)
    return box[:, 0] + u * (box[:, 1] - box[:, 0])
