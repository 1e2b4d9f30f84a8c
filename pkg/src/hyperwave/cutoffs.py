"""Smooth cutoffs ``chi_0`` (low frequencies) and ``chi_inf = 1 - chi_0``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np


def _bump(x):
    x = np.asarray(x, dtype=float)
    with np.errstate(divide="ignore", over="ignore"):
        return np.where(x > 0, np.exp(-1.0 / np.where(x > 0, x, 1.0)), 0.0)


def smooth_step(x):
    """C-infinity step: 0 for x <= 0, 1 for x >= 1."""
    a, b = _bump(x), _bump(1.0 - np.asarray(x, dtype=float))
    return a / (a + b)


def chi0(lam):
    """Equal to 1 on [0, 1] and 0 on [2, inf)."""
    return smooth_step(2.0 - np.abs(np.asarray(lam, dtype=float)))


def chi_inf(lam):
    """``1 - chi0``, computed directly to keep full relative accuracy."""
    return smooth_step(np.abs(np.asarray(lam, dtype=float)) - 1.0)


@dataclass(frozen=True)
class CutoffPair:
    chi0: Callable = chi0
    chi_inf: Callable = chi_inf

    def partition_error(self, lambdas) -> float:
        lam = np.asarray(lambdas, dtype=float)
        return float(np.max(np.abs(self.chi0(lam) + self.chi_inf(lam) - 1.0)))
