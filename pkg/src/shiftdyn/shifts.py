"""Generalized bilateral weighted shifts T_{U,W} and S_{U,W} = T_{U,W}^{-1} on l2(A).

(T x)_n = W_n x_{n-1} U and (S y)_n = W_{n+1}^{-1} y_{n+1} U*.  Long weight
products are never materialized: they are accumulated as a coefficient walk
over the basis rows their operand actually occupies.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import InvalidParameter
from .module import ModuleVector
from .operators import (
    DenseOp,
    Operator,
    ShiftOp,
    adjoint,
    bilateral_shift,
    compose,
    cols_of,
    identity,
    inverse,
    is_finite,
    operator_norm,
    projection,
    rows_of,
    sup_coefficient,
)

PROBE = 32


def _norm_on_probe(op: Operator, probe: int) -> float:
    if isinstance(op, ShiftOp) and not op.is_finite:
        return sup_coefficient(op, np.arange(-probe, probe + 1))
    return operator_norm(op)


class WeightSequence:
    """Memoized j -> W_j with inverses j -> W_j^{-1}.

    ``observed_bounds`` is the running sup of ||W_j|| and ||W_j^{-1}|| over the
    indices queried so far, each norm measured on basis vectors |k| <= probe.
    It is a monitor, not a certificate of uniform boundedness.
    """

    def __init__(
        self,
        generator: Callable[[int], Operator],
        inverse_generator: Callable[[int], Operator] | None = None,
        probe: int = PROBE,
        name: str = "custom",
    ):
        self._gen = generator
        self._inv_gen = inverse_generator or (lambda j: inverse(generator(j)))
        self.probe = probe
        self.name = name
        self._cache: dict[int, Operator] = {}
        self._inv_cache: dict[int, Operator] = {}
        self._bounds = [0.0, 0.0]
        self._lock = threading.Lock()

    def _get(self, j: int, cache: dict, gen: Callable, slot: int) -> Operator:
        op = cache.get(j)
        if op is not None:
            return op
        op = gen(j)
        b = _norm_on_probe(op, self.probe)
        with self._lock:
            op = cache.setdefault(j, op)
            self._bounds[slot] = max(self._bounds[slot], b)
        return op

    def __getitem__(self, j: int) -> Operator:
        return self._get(int(j), self._cache, self._gen, 0)

    def inverse(self, j: int) -> Operator:
        return self._get(int(j), self._inv_cache, self._inv_gen, 1)

    @property
    def observed_bounds(self) -> tuple[float, float]:
        with self._lock:
            return self._bounds[0], self._bounds[1]

    def __repr__(self) -> str:
        return f"WeightSequence({self.name})"


def _is_unitary_shift(U: ShiftOp, probe: int) -> bool:
    c = U.coeff(np.arange(-probe, probe + 1))
    return bool(np.all(np.abs(np.abs(c) - 1.0) < 1e-12))


@dataclass(frozen=True)
class GeneralizedShift:
    """The pair (U, W) defining T_{U,W}."""

    U: Operator
    W: WeightSequence
    name: str = ""

    def __post_init__(self):
        U = self.U
        if isinstance(U, ShiftOp):
            if U.is_finite or not _is_unitary_shift(U, self.W.probe):
                raise InvalidParameter("U must be unitary (|c(j)| = 1 on probed indices)")
        elif isinstance(U, DenseOp):
            G = U.matrix.conj().T @ U.matrix
            if not np.allclose(G, np.eye(U.window.size), atol=1e-12):
                raise InvalidParameter("dense U is not unitary on its window")
        else:
            raise InvalidParameter("U must be a ShiftOp or DenseOp")

    @cached_property
    def U_star(self) -> Operator:
        return adjoint(self.U)

    @property
    def u_is_identity(self) -> bool:
        U = self.U
        if not isinstance(U, ShiftOp) or U.is_finite or U.offset != 0:
            return False
        c = U.coeff(np.arange(-self.W.probe, self.W.probe + 1))
        return bool(np.all(c == 1))


@dataclass(frozen=True)
class IncreasingSequence:
    """Strictly increasing nonnegative integers: arithmetic start + step*k, or explicit."""

    start: int = 1
    step: int = 1
    terms: tuple[int, ...] | None = None

    def __post_init__(self):
        if self.terms is not None:
            t = tuple(int(v) for v in self.terms)
            object.__setattr__(self, "terms", t)
            if not t:
                raise InvalidParameter("explicit sequence is empty")
            if t[0] < 0 or any(b <= a for a, b in zip(t, t[1:])):
                raise InvalidParameter(f"sequence must be strictly increasing and nonnegative: {t}")
        elif self.start < 0 or self.step < 1:
            raise InvalidParameter(f"need start >= 0 and step >= 1, got {self.start}, {self.step}")

    @classmethod
    def arithmetic(cls, start: int, step: int = 1) -> "IncreasingSequence":
        return cls(start=start, step=step)

    @classmethod
    def explicit(cls, terms: Iterable[int]) -> "IncreasingSequence":
        return cls(terms=tuple(terms))

    @property
    def bounded(self) -> bool:
        return self.terms is not None

    def term(self, k: int) -> int:
        """0-based k-th term."""
        if self.terms is not None:
            return self.terms[k]
        return self.start + self.step * k

    def take(self, count: int) -> list[int]:
        if self.terms is not None and count > len(self.terms):
            raise InvalidParameter(f"sequence has only {len(self.terms)} terms, {count} requested")
        return [self.term(k) for k in range(count)]


class Approximants:
    """Operators D_j^{(k)} indexed by (j, k); P_m wherever the table is silent."""

    def __init__(self, m: int, table: Mapping[tuple[int, int], Operator] | None = None):
        self.m = m
        self.table = dict(table or {})
        self.default = projection(m)
        for op in self.table.values():
            if not is_finite(op) and not isinstance(op, DenseOp):
                raise InvalidParameter("approximants must be finite-rank operators")

    def __call__(self, j: int, k: int) -> Operator:
        return self.table.get((j, k), self.default)

    def rows(self, j: int) -> np.ndarray:
        parts = [rows_of(self.default)] + [rows_of(op) for (jj, _), op in self.table.items() if jj == j]
        return np.unique(np.concatenate(parts))

    @property
    def is_default(self) -> bool:
        return not self.table


# -- coefficient walks --------------------------------------------------------


class ProductWalk:
    """Left product F_t ... F_1 restricted to span{e_r : r in rows}.

    While every factor is a ShiftOp the product on those rows is tracked as
    (current index, accumulated coefficient) per row, one multiply per factor
    per row.  A non-shift factor switches to plain operator composition.
    """

    def __init__(self, rows: Sequence[int]):
        self.rows = np.asarray(rows, dtype=np.int64)
        self._idx = self.rows.copy()
        self._coef = np.ones(self.rows.size)
        self._offset = 0
        self._op: Operator | None = None
        self.length = 0

    def push(self, factor: Operator) -> None:
        if self._op is None and isinstance(factor, ShiftOp):
            self._coef = self._coef * factor.coeff(self._idx)
            self._idx = self._idx + factor.offset
            self._offset += factor.offset
        else:
            self._op = compose(factor, self.operator)
        self.length += 1

    @property
    def operator(self) -> Operator:
        if self._op is not None:
            return self._op
        return ShiftOp._from_arrays(self._offset, self.rows, self._coef)

    def apply(self, op: Operator) -> Operator:
        """(product) o op; exact when the range of op lies in span{e_rows}."""
        return compose(self.operator, op)


class WeightWalk(ProductWalk):
    """Forward walk W_{j+t} ... W_{j+1}, or backward walk W_{j-t+1}^{-1} ... W_j^{-1}."""

    def __init__(self, W: WeightSequence, j: int, rows: Sequence[int], backward: bool = False):
        super().__init__(rows)
        self.W, self.j, self.backward = W, j, backward

    def advance(self, count: int) -> "WeightWalk":
        for _ in range(count):
            t = self.length + 1
            self.push(self.W.inverse(self.j - t + 1) if self.backward else self.W[self.j + t])
        return self


def forward_factors(W: WeightSequence, j: int, l: int) -> list[Operator]:
    """W_{j+1}, ..., W_{j+l} in application order."""
    return [W[j + t] for t in range(1, l + 1)]


def backward_factors(W: WeightSequence, j: int, l: int) -> list[Operator]:
    """W_j^{-1}, ..., W_{j-l+1}^{-1} in application order."""
    return [W.inverse(j - t + 1) for t in range(1, l + 1)]


def apply_left(factors: Iterable[Operator], op: Operator) -> Operator:
    """F_last o ... o F_first o op."""
    if isinstance(op, DenseOp) or not is_finite(op):
        for f in factors:
            op = compose(f, op)
        return op
    walk = ProductWalk(rows_of(op))
    for f in factors:
        walk.push(f)
    return walk.apply(op)


def right_power(op: Operator, U: Operator, n: int) -> Operator:
    """op o U^n, walking U over the columns op actually uses."""
    if n == 0:
        return op
    if isinstance(op, DenseOp) or not isinstance(U, ShiftOp) or not is_finite(op):
        for _ in range(n):
            op = compose(op, U)
        return op
    walk = ProductWalk(cols_of(op) - n * U.offset)
    for _ in range(n):
        walk.push(U)
    return compose(op, walk.operator)


def forward_product(W: WeightSequence, j: int, l: int, D: Operator) -> Operator:
    return apply_left(forward_factors(W, j, l), D)


def backward_product(W: WeightSequence, j: int, l: int, G: Operator) -> Operator:
    return apply_left(backward_factors(W, j, l), G)


def forward_product_norm(W: WeightSequence, j: int, l: int, D: Operator) -> float:
    """||W_{j+l} ... W_{j+1} D||."""
    return operator_norm(forward_product(W, j, l, D))


def backward_product_norm(W: WeightSequence, j: int, l: int, G: Operator) -> float:
    """||W_{j-l+1}^{-1} ... W_j^{-1} G||."""
    return operator_norm(backward_product(W, j, l, G))


# -- the shift and its inverse on module vectors ------------------------------


def apply_T(shift: GeneralizedShift, x: ModuleVector) -> ModuleVector:
    """(T x)_n = W_n x_{n-1} U."""
    return ModuleVector({j + 1: compose(compose(shift.W[j + 1], op), shift.U) for j, op in x.items()})


def apply_S(shift: GeneralizedShift, y: ModuleVector) -> ModuleVector:
    """(S y)_n = W_{n+1}^{-1} y_{n+1} U*."""
    return ModuleVector({j - 1: compose(compose(shift.W.inverse(j), op), shift.U_star) for j, op in y.items()})


def iterate_T(shift: GeneralizedShift, n: int, x: ModuleVector) -> ModuleVector:
    """(T^n x)_i = W_i ... W_{i-n+1} x_{i-n} U^n."""
    if n < 0:
        raise InvalidParameter(f"iterate count must be >= 0, got {n}")
    return ModuleVector(
        {j + n: right_power(forward_product(shift.W, j, n, op), shift.U, n) for j, op in x.items()}
    )


def iterate_S(shift: GeneralizedShift, n: int, y: ModuleVector) -> ModuleVector:
    """(S^n y)_i = W_{i+1}^{-1} ... W_{i+n}^{-1} y_{i+n} U*^n."""
    if n < 0:
        raise InvalidParameter(f"iterate count must be >= 0, got {n}")
    return ModuleVector(
        {j - n: right_power(backward_product(shift.W, j, n, op), shift.U_star, n) for j, op in y.items()}
    )


# -- named families -----------------------------------------------------------


def two_sided_shift(below: float, above: float) -> ShiftOp:
    """e_n -> below * e_{n+1} for n < 0 and above * e_{n+1} for n >= 0."""

    def fn(j):
        return np.where(j < 0, below, above)

    return ShiftOp(1, fn=fn)


def _ex32_weight(i: int) -> ShiftOp:
    if i == 0:
        return identity()
    if i < 0:
        return _ex32_inverse(-i)
    return two_sided_shift((i + 1) / i, i / (i + 1))


def _ex32_inverse(i: int) -> ShiftOp:
    if i == 0:
        return identity()
    if i < 0:
        return _ex32_weight(-i)
    # inverse of e_n -> c(n) e_{n+1}: e_n -> e_{n-1} / c(n-1)
    return ShiftOp(-1, fn=lambda j: np.where(j - 1 < 0, i / (i + 1), (i + 1) / i))


def unitary(name: str) -> ShiftOp:
    names = {
        "identity": identity,
        "bilateral_shift": lambda: bilateral_shift(1),
        "bilateral_shift_inverse": lambda: bilateral_shift(-1),
    }
    if name not in names:
        raise InvalidParameter(f"unknown unitary {name!r}; choose from {sorted(names)}")
    return names[name]()


def family_example_3_2(U: Operator | None = None) -> GeneralizedShift:
    """W_i e_j = i/(i+1) e_{j+1} (j >= 0), (i+1)/i e_{j+1} (j < 0) for i > 0; W_0 = I; W_i = W_{-i}^{-1}."""
    W = WeightSequence(_ex32_weight, _ex32_inverse, name="example_3_2")
    return GeneralizedShift(U if U is not None else identity(), W, name="example_3_2")


def family_example_3_11(alpha: float, U: Operator | None = None) -> GeneralizedShift:
    """W_j = V with V e_n = alpha e_{n+1} (n < 0), e_{n+1}/alpha (n >= 0)."""
    if not alpha > 1:
        raise InvalidParameter(f"alpha must exceed 1, got {alpha}")
    V = two_sided_shift(alpha, 1.0 / alpha)
    V_inv = inverse(V)
    W = WeightSequence(lambda j: V, lambda j: V_inv, name=f"example_3_11(alpha={alpha})")
    return GeneralizedShift(U if U is not None else identity(), W, name=W.name)


def family_constant(op: Operator, U: Operator | None = None, name: str = "constant") -> GeneralizedShift:
    """W_j = op for every j."""
    op_inv = inverse(op)
    W = WeightSequence(lambda j: op, lambda j: op_inv, name=name)
    return GeneralizedShift(U if U is not None else identity(), W, name=name)


def custom_weight(offset: int, table: Mapping[int, float]) -> ShiftOp:
    """Shift with c(j) from a contiguous table, extended by the edge values beyond it."""
    if not table:
        raise InvalidParameter("custom coefficient table is empty")
    keys = sorted(int(k) for k in table)
    if keys != list(range(keys[0], keys[-1] + 1)):
        raise InvalidParameter("custom coefficient table must cover a contiguous index range")
    vals = np.array([table[k] for k in keys])
    if np.any(vals == 0):
        raise InvalidParameter("custom weights must have nonzero coefficients")
    lo = keys[0]

    def fn(j):
        return vals[np.clip(j - lo, 0, vals.size - 1)]

    return ShiftOp(offset, fn=fn)


def family_custom(offset: int, table: Mapping[int, float], U: Operator | None = None) -> GeneralizedShift:
    return family_constant(custom_weight(offset, table), U, name="custom")


@dataclass(frozen=True)
class DisjointFamily:
    """A tuple of shifts plus the declared threshold m -> N_m for the orthogonality condition."""

    shifts: tuple[GeneralizedShift, ...]
    nm: Callable[[int], int] = field(default=lambda m: 2 * m + 1)

    @property
    def unitaries(self) -> list[Operator]:
        return [s.U for s in self.shifts]


EXAMPLE_3_6_PAIRS = {
    # U1^n U2^-n = B^-n and U2^n U1^-n = B^n move L_m off itself once n > 2m.
    "default": ("identity", "bilateral_shift"),
    # U1^n U2^-n = B^2n: orthogonal once n > m, so 2m + 1 also works.
    "alternate": ("bilateral_shift", "bilateral_shift_inverse"),
}


def family_example_3_6(unitaries: str | Sequence[Operator] = "default") -> DisjointFamily:
    """W^(1)_j = W_1 (2 below / 1/2 above) and W^(2)_j = W_2^2 (3 below / 1/3 above)."""
    if isinstance(unitaries, str):
        if unitaries not in EXAMPLE_3_6_PAIRS:
            raise InvalidParameter(f"unknown unitary pair {unitaries!r}")
        U1, U2 = (unitary(n) for n in EXAMPLE_3_6_PAIRS[unitaries])
    else:
        U1, U2 = unitaries
    W1 = two_sided_shift(2.0, 0.5)
    W2 = two_sided_shift(3.0, 1.0 / 3.0)
    W1_inv = inverse(W1)
    W2sq = compose(W2, W2)
    W2sq_inv = compose(inverse(W2), inverse(W2))
    s1 = GeneralizedShift(U1, WeightSequence(lambda j: W1, lambda j: W1_inv, name="W1"), name="example_3_6[1]")
    s2 = GeneralizedShift(U2, WeightSequence(lambda j: W2sq, lambda j: W2sq_inv, name="W2^2"), name="example_3_6[2]")
    return DisjointFamily((s1, s2))
