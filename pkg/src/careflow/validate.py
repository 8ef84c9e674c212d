"""Output-versus-observation validation statistics.

ks_two_sample computes the exact two-sample Kolmogorov-Smirnov sup-distance
by merging the sorted samples and evaluating both empirical CDFs at every
merged point, then the asymptotic Kolmogorov p-value with the effective-n
small-sample correction en + 0.12 + 0.11/en, en = sqrt(n1 n2 / (n1 + n2)).
The statistic depends only on ranks, so it is invariant under strictly
increasing transforms of both samples.

km_overlay pairs two product-limit curves on their merged time grid and
reports the largest vertical gap, the quantity eyeballed in
survival-overlay plots.

The published pooled comparison for daily census concatenates post-warmup
days across replications before testing. Caveat: pooling treats
autocorrelated days within a replication as exchangeable draws, so the
nominal p-value is optimistic; it replicates the published method and is
kept for comparability.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import kolmogorov

from .errors import DataError
from .survival import KmCurve

__all__ = ["KsResult", "KmOverlay", "ks_two_sample", "km_overlay"]


@dataclass(frozen=True)
class KsResult:
    statistic: float
    p_value: float
    n1: int
    n2: int


@dataclass(frozen=True)
class KmOverlay:
    """Two survival curves evaluated on their merged time grid."""

    times: np.ndarray
    survival_a: np.ndarray
    survival_b: np.ndarray
    max_gap: float


def ks_two_sample(a, b) -> KsResult:
    """Exact sup-distance between two empirical CDFs, asymptotic p-value."""
    x = np.sort(np.asarray(a, dtype=float))
    y = np.sort(np.asarray(b, dtype=float))
    n1, n2 = len(x), len(y)
    if n1 == 0 or n2 == 0:
        raise DataError("both samples must be non-empty")
    if np.any(~np.isfinite(x)) or np.any(~np.isfinite(y)):
        raise DataError("samples must be finite")

    grid = np.concatenate([x, y])
    cdf_x = np.searchsorted(x, grid, side="right") / n1
    cdf_y = np.searchsorted(y, grid, side="right") / n2
    statistic = float(np.max(np.abs(cdf_x - cdf_y)))

    en = np.sqrt(n1 * n2 / (n1 + n2))
    p_value = float(kolmogorov((en + 0.12 + 0.11 / en) * statistic))
    return KsResult(
        statistic=statistic,
        p_value=min(max(p_value, 0.0), 1.0),
        n1=n1,
        n2=n2,
    )


def km_overlay(observed: KmCurve, simulated: KmCurve) -> KmOverlay:
    """Step-evaluate both curves on the merged grid; report the max gap."""
    times = np.union1d(observed.times, simulated.times)
    if len(times) == 0:
        raise DataError("both curves are empty")
    s_a = observed.step_values(times)
    s_b = simulated.step_values(times)
    return KmOverlay(
        times=times,
        survival_a=s_a,
        survival_b=s_b,
        max_gap=float(np.max(np.abs(s_a - s_b))),
    )
