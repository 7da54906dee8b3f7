"""Paired significance test and bootstrap intervals for base-level accuracy."""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np
from scipy.stats import chi2

from ..errors import EmptySample, NoDiscordantPairs


def discordant_counts(paired: Iterable[tuple[bool, bool]]) -> tuple[int, int]:
    """b = a right and b wrong, c = a wrong and b right."""
    b = c = 0
    for a_ok, b_ok in paired:
        if a_ok and not b_ok:
            b += 1
        elif b_ok and not a_ok:
            c += 1
    return b, c


def mcnemar_counts(b: int, c: int) -> tuple[float, float]:
    if b < 0 or c < 0:
        raise ValueError("counts must be non-negative")
    if b + c == 0:
        raise NoDiscordantPairs()
    stat = (abs(b - c) - 1) ** 2 / (b + c)
    return float(stat), float(chi2.sf(stat, df=1))


def mcnemar(paired: Iterable[tuple[bool, bool]]) -> tuple[float, float]:
    """Continuity-corrected McNemar statistic and chi-square(1) p-value."""
    return mcnemar_counts(*discordant_counts(paired))


def bootstrap_ci(
    correct: Sequence[bool] | np.ndarray,
    trials: int = 2000,
    level: float = 0.95,
    seed: int = 0,
) -> tuple[float, float]:
    """Percentile bootstrap interval for the mean of a 0/1 sample."""
    x = np.asarray(correct, dtype=float)
    if x.size == 0:
        raise EmptySample()
    if trials < 1000:
        raise ValueError("use at least 1000 bootstrap trials")
    if not 0 < level < 1:
        raise ValueError("level must lie in (0, 1)")
    rng = np.random.default_rng(seed)
    idx = rng.integers(0, x.size, size=(trials, x.size))
    means = x[idx].mean(axis=1)
    alpha = (1 - level) / 2
    lo, hi = np.quantile(means, [alpha, 1 - alpha])
    return float(lo), float(hi)
