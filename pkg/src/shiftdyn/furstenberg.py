"""Return sets and finite-horizon membership tests for Furstenberg families."""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable

import numpy as np

from .errors import InvalidParameter


@dataclass(frozen=True)
class ReturnSet:
    """A subset of [0, horizon], stored sorted."""

    members: tuple[int, ...]
    horizon: int

    def __post_init__(self):
        if self.horizon < 0:
            raise InvalidParameter(f"horizon must be >= 0, got {self.horizon}")
        m = tuple(sorted({int(v) for v in self.members}))
        if m and (m[0] < 0 or m[-1] > self.horizon):
            raise InvalidParameter(f"members must lie in [0, {self.horizon}]")
        object.__setattr__(self, "members", m)

    @classmethod
    def from_mask(cls, mask: Iterable[bool]) -> "ReturnSet":
        mask = np.asarray(list(mask) if not isinstance(mask, np.ndarray) else mask, dtype=bool)
        return cls(tuple(np.flatnonzero(mask).tolist()), mask.size - 1)

    @classmethod
    def from_predicate(cls, pred: Callable[[int], bool], horizon: int) -> "ReturnSet":
        return cls(tuple(n for n in range(horizon + 1) if pred(n)), horizon)

    @property
    def mask(self) -> np.ndarray:
        out = np.zeros(self.horizon + 1, dtype=bool)
        out[list(self.members)] = True
        return out

    def __len__(self) -> int:
        return len(self.members)

    def __contains__(self, n: int) -> bool:
        return n in set(self.members)

    def union(self, other: "ReturnSet") -> "ReturnSet":
        return ReturnSet(self.members + other.members, max(self.horizon, other.horizon))

    def intersection(self, other: "ReturnSet") -> "ReturnSet":
        return ReturnSet(tuple(set(self.members) & set(other.members)), min(self.horizon, other.horizon))

    def without_prefix(self, n: int) -> "ReturnSet":
        """A minus [0, n]."""
        return ReturnSet(tuple(v for v in self.members if v > n), self.horizon)


def lower_density(rs: ReturnSet) -> float:
    """min over n in [N/2, N] of #(A cap [0, n]) / (n + 1): the liminf seen at horizon N."""
    N = rs.horizon
    if N < 1:
        raise InvalidParameter("lower density needs horizon >= 1")
    counts = np.cumsum(rs.mask)
    n = np.arange(N // 2, N + 1)
    return float(np.min(counts[n] / (n + 1)))


class FamilyVariant(str, Enum):
    INF = "Inf"
    COF = "Cof"
    LOWER_DENSITY = "LowerDensity"


@dataclass(frozen=True)
class FurstenbergFamily:
    """Finite-horizon stand-ins for the infinite, cofinite and positive-lower-density families.

    Inf: at least ``k_inf`` members.
    Cof: some n0 <= N - k_tail with [n0, N] inside the set.
    LowerDensity(delta): Inf holds and some s <= N - k_tail has
        #(A cap [s, n]) / (n - s + 1) >= delta for every n in [s + k_tail, N].

    The density is measured from a movable start s, so deleting a finite
    prefix cannot break it; this keeps Cof => LowerDensity => Inf exact at
    every horizon.
    """

    variant: FamilyVariant
    delta: float | None = None
    k_inf: int = 25
    k_tail: int = 25

    def __post_init__(self):
        object.__setattr__(self, "variant", FamilyVariant(self.variant))
        if self.variant is FamilyVariant.LOWER_DENSITY:
            if self.delta is None or not 0 < self.delta <= 1:
                raise InvalidParameter(f"LowerDensity needs delta in (0, 1], got {self.delta}")
        elif self.delta is not None:
            raise InvalidParameter(f"{self.variant.value} takes no delta")
        if self.k_inf < 1 or self.k_tail < 0 or self.k_inf > self.k_tail + 1:
            raise InvalidParameter("need 1 <= k_inf <= k_tail + 1")

    @classmethod
    def inf(cls, **kw) -> "FurstenbergFamily":
        return cls(FamilyVariant.INF, **kw)

    @classmethod
    def cof(cls, **kw) -> "FurstenbergFamily":
        return cls(FamilyVariant.COF, **kw)

    @classmethod
    def lower_density(cls, delta: float, **kw) -> "FurstenbergFamily":
        return cls(FamilyVariant.LOWER_DENSITY, delta, **kw)

    @property
    def label(self) -> str:
        if self.variant is FamilyVariant.LOWER_DENSITY:
            return f"LowerDensity({self.delta:g})"
        return self.variant.value

    def contains(self, rs: ReturnSet) -> bool:
        return self.witness_start(rs) is not None

    def witness_start(self, rs: ReturnSet) -> int | None:
        """Largest s such that the members in [s, N] alone certify acceptance, or None.

        Removing any prefix [0, n] with n < s keeps the set accepted.
        """
        mask = rs.mask
        if self.variant is FamilyVariant.INF:
            return _inf_start(mask, self.k_inf)
        if self.variant is FamilyVariant.COF:
            return _cof_start(mask, self.k_tail)
        s_inf = _inf_start(mask, self.k_inf)
        if s_inf is None:
            return None
        s_den = _density_start(mask, self.delta, self.k_tail)
        return None if s_den is None else min(s_inf, s_den)


def _inf_start(mask: np.ndarray, k: int) -> int | None:
    idx = np.flatnonzero(mask)
    return int(idx[-k]) if idx.size >= k else None


def _cof_start(mask: np.ndarray, k_tail: int) -> int | None:
    N = mask.size - 1
    misses = np.flatnonzero(~mask)
    n0 = int(misses[-1]) + 1 if misses.size else 0
    return N - k_tail if n0 <= N - k_tail else None


def _density_start(mask: np.ndarray, delta: float, k_tail: int) -> int | None:
    N = mask.size - 1
    if N - k_tail < 0:
        return None
    # count(A cap [s, n]) >= delta (n - s + 1)  <=>  g(n + 1) >= g(s)  with  g(t) = count(A cap [0, t)) - delta t,
    # so start s works iff the minimum of g over [s + k_tail + 1, N + 1] stays above g(s)
    g = np.concatenate(([0], np.cumsum(mask))) - delta * np.arange(N + 2)
    suffix_min = np.minimum.accumulate(g[::-1])[::-1]
    s = np.arange(0, N - k_tail + 1)
    # tolerate rounding when delta sits exactly on a fraction
    ok = np.flatnonzero(suffix_min[s + k_tail + 1] >= g[s] - 1e-12 * (N + 1))
    return int(ok[-1]) if ok.size else None
