"""Finitely supported elements of the standard Hilbert module l2(A), A = compact operators."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Union

import numpy as np

from .operators import (
    FiniteOp,
    Operator,
    ShiftOp,
    add,
    adjoint,
    compose,
    is_zero,
    operator_norm,
    projection,
    rows_of,
    scale,
    sub,
)


class ModuleVector:
    """x = (x_j) with finitely many nonzero coordinates; absent means zero."""

    __slots__ = ("_coords",)

    def __init__(self, coords: Mapping[int, Operator] | None = None):
        self._coords = {int(j): op for j, op in sorted((coords or {}).items()) if not is_zero(op)}

    @classmethod
    def zero(cls) -> "ModuleVector":
        return cls()

    @property
    def support(self) -> list[int]:
        return list(self._coords)

    def __getitem__(self, j: int) -> Operator:
        return self._coords.get(j, ShiftOp.zero())

    def __contains__(self, j: int) -> bool:
        return j in self._coords

    def __len__(self) -> int:
        return len(self._coords)

    def items(self):
        return self._coords.items()

    def map(self, f: Callable[[int, Operator], tuple[int, Operator]]) -> "ModuleVector":
        return ModuleVector(dict(f(j, op) for j, op in self._coords.items()))

    def restrict(self, keep: Iterable[int]) -> "ModuleVector":
        keep = set(keep)
        return ModuleVector({j: op for j, op in self._coords.items() if j in keep})

    def __add__(self, other: "ModuleVector") -> "ModuleVector":
        out = dict(self._coords)
        for j, op in other.items():
            out[j] = add(out[j], op) if j in out else op
        return ModuleVector(out)

    def __sub__(self, other: "ModuleVector") -> "ModuleVector":
        out = dict(self._coords)
        for j, op in other.items():
            out[j] = sub(out[j], op) if j in out else scale(op, -1.0)
        return ModuleVector(out)

    def __mul__(self, c: complex) -> "ModuleVector":
        return ModuleVector({j: scale(op, c) for j, op in self._coords.items()})

    __rmul__ = __mul__

    def __repr__(self) -> str:
        return f"ModuleVector({self._coords!r})"


def inner_product(x: ModuleVector, y: ModuleVector) -> Operator:
    """<x, y> = sum_j x_j* y_j over the common support."""
    total: Operator = ShiftOp.zero()
    for j in sorted(set(x.support) & set(y.support)):
        total = add(total, compose(adjoint(x[j]), y[j]))
    return total


def module_norm(x: ModuleVector) -> float:
    """||<x, x>||^(1/2)."""
    return float(np.sqrt(operator_norm(inner_product(x, x))))


@dataclass(frozen=True)
class FjmSpec:
    """Vectors supported on [-J, J] whose coordinates have range in L_m."""

    J: int
    m: int

    def __post_init__(self):
        if self.J < 0 or self.m < 0:
            raise ValueError(f"J and m must be nonnegative, got J={self.J}, m={self.m}")

    @property
    def coordinates(self) -> range:
        return range(-self.J, self.J + 1)


Fill = Union[None, Operator, Mapping[int, Operator], Callable[[int], Operator]]


def make_fjm_vector(spec: FjmSpec, fill: Fill = None) -> ModuleVector:
    """Element of F_{J,m}: coordinate j in [-J, J] is P_m o fill(j) (P_m by default)."""
    P = projection(spec.m)
    coords = {}
    for j in spec.coordinates:
        if fill is None:
            op = P
        elif callable(fill) and not isinstance(fill, (ShiftOp, FiniteOp)):
            op = compose(P, fill(j))
        elif isinstance(fill, Mapping):
            if j not in fill:
                continue
            op = compose(P, fill[j])
        else:
            op = compose(P, fill)
        coords[j] = op
    return ModuleVector(coords)


def in_fjm(x: ModuleVector, spec: FjmSpec) -> bool:
    """x_j = P_m x_j on [-J, J] and x_j = 0 elsewhere."""
    for j, op in x.items():
        if abs(j) > spec.J:
            return False
        if np.any(np.abs(rows_of(op)) > spec.m):
            return False
    return True


def random_fjm(spec: FjmSpec, rng: np.random.Generator, cols: int | None = None) -> ModuleVector:
    """Random element of F_{J,m}: x_j = P_m R_j P_c with Gaussian R_j (c defaults to m)."""
    c = spec.m if cols is None else cols
    rows = np.arange(-spec.m, spec.m + 1)
    cidx = np.arange(-c, c + 1)
    return ModuleVector(
        {
            j: FiniteOp.from_matrix(rows, cidx, rng.standard_normal((rows.size, cidx.size)))
            for j in spec.coordinates
        }
    )
