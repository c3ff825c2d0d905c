"""Three-valued convergence verdicts for series of nonnegative terms at a finite horizon."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from typing import Sequence

import numpy as np


class SeriesVerdict(str, Enum):
    CONVERGES = "Converges"
    DIVERGES = "Diverges"
    INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class SeriesTolerances:
    divergence_bound: float = 1e6
    cauchy_tol: float = 1e-8
    ratio_limit: float = 0.999
    raabe_converge: float = 1.25
    raabe_diverge_slack: float = 1e-6


@dataclass(frozen=True)
class SeriesReport:
    terms: np.ndarray = field(repr=False)
    partial_sums: np.ndarray = field(repr=False)
    tail_ratio: float
    raabe_min: float
    raabe_max: float
    verdict: SeriesVerdict
    reason: str

    @property
    def horizon(self) -> int:
        return int(self.terms.size)

    @property
    def total(self) -> float:
        return float(self.partial_sums[-1]) if self.partial_sums.size else 0.0


def _tail_stats(tail: np.ndarray, offset: int) -> tuple[float, float, float]:
    """Max consecutive ratio and min/max Raabe statistic l*(a_l/a_{l+1} - 1) over a tail.

    ``offset`` is the 1-based index of tail[0].  Pairs with a zero term are skipped.
    """
    a, b = tail[:-1], tail[1:]
    ok = (a > 0) & (b > 0)
    if not np.any(ok):
        return 0.0, np.nan, np.nan
    # subnormal terms can overflow a ratio to inf, which correctly fails the ratio test
    with np.errstate(over="ignore"):
        ratio = b[ok] / a[ok]
        l = np.arange(offset, offset + a.size)[ok]
        raabe = l * (a[ok] / b[ok] - 1.0)
    return float(ratio.max()), float(raabe.min()), float(raabe.max())


def classify_series(terms: Sequence[float], tol: SeriesTolerances = SeriesTolerances()) -> SeriesReport:
    """Judge sum_{l >= 1} terms[l-1] from the terms available.

    Rules, in order: partial sums past ``divergence_bound`` diverge; an all-zero
    last quarter converges; a last-quarter increase below ``cauchy_tol`` with tail
    ratio below ``ratio_limit`` converges; otherwise Raabe's test on the last
    quarter decides (>= ``raabe_converge`` converges, <= 1 diverges).  Anything
    else is Inconclusive.
    """
    t = np.asarray(terms, dtype=float)
    if t.ndim != 1 or t.size < 4:
        raise ValueError("need at least 4 terms")
    if np.any(t < 0) or not np.all(np.isfinite(t)):
        raise ValueError("terms must be finite and nonnegative")
    sums = np.cumsum(t)
    q = (3 * t.size) // 4
    tail = t[q:]
    ratio, rmin, rmax = _tail_stats(tail, q + 1)
    increase = float(sums[-1] - sums[q - 1])

    def report(verdict, reason):
        return SeriesReport(t, sums, ratio, rmin, rmax, verdict, reason)

    if sums[-1] > tol.divergence_bound:
        return report(SeriesVerdict.DIVERGES, f"partial sum {sums[-1]:.6g} exceeds {tol.divergence_bound:g}")
    if not np.any(tail > 0):
        return report(SeriesVerdict.CONVERGES, "terms vanish on the last quarter")
    if increase < tol.cauchy_tol and ratio < tol.ratio_limit:
        return report(SeriesVerdict.CONVERGES, f"last-quarter increase {increase:.3g}, tail ratio {ratio:.6g}")
    if not np.isnan(rmin):
        if rmin >= tol.raabe_converge and ratio < tol.ratio_limit:
            return report(SeriesVerdict.CONVERGES, f"Raabe statistic >= {rmin:.4g} on the last quarter")
        if rmax <= 1.0 + tol.raabe_diverge_slack:
            return report(SeriesVerdict.DIVERGES, f"Raabe statistic <= {rmax:.6g} on the last quarter")
    return report(SeriesVerdict.INCONCLUSIVE, f"last-quarter increase {increase:.3g}, tail ratio {ratio:.6g}")
