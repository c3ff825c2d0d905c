"""Bounded operators on a separable Hilbert space with basis {e_j : j in Z}.

Three representations are used:

- ``ShiftOp``: e_j -> c(j) e_{j+d}.  Either a total coefficient function
  (infinite support, e.g. weights and unitaries) or a finite table
  (finite rank, e.g. projections P_m and anything composed with them).
- ``FiniteOp``: a finite sum of finite-support ``ShiftOp`` diagonals with
  distinct offsets.  Every finite matrix over Z x Z is of this form, so
  finite-rank arithmetic stays exact and windowless.
- ``DenseOp``: a matrix on the symmetric index window [-M, M].  Operations
  that would push nonzero content out of the window raise ``WindowOverflow``.

All values are immutable.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Mapping, Union

import numpy as np

from .errors import NonConvergence, NotInvertible, RepresentationError, WindowOverflow

IndexFn = Callable[[np.ndarray], np.ndarray]


def _index_array(j) -> np.ndarray:
    return np.atleast_1d(np.asarray(j, dtype=np.int64))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class IndexWindow:
    """Indices [-M, M] of a truncation of H."""

    M: int

    def __post_init__(self):
        if self.M < 0:
            raise ValueError(f"window half-width must be nonnegative, got {self.M}")

    def contains(self, j) -> np.ndarray | bool:
        out = np.abs(np.asarray(j)) <= self.M
        return bool(out) if np.ndim(out) == 0 else out

    @property
    def size(self) -> int:
        return 2 * self.M + 1

    @property
    def indices(self) -> np.ndarray:
        return np.arange(-self.M, self.M + 1, dtype=np.int64)


class ShiftOp:
    """Weighted basis shift e_j -> c(j) e_{j+offset}.

    Finite instances hold a sorted support array and the matching nonzero
    coefficients; infinite instances hold a vectorized coefficient function
    ``fn(int_array) -> array``.
    """

    __slots__ = ("offset", "_fn", "_support", "_values")

    def __init__(self, offset: int, fn: IndexFn | None = None, support=None, values=None):
        if (fn is None) == (support is None):
            raise ValueError("ShiftOp needs exactly one of fn or support/values")
        self.offset = int(offset)
        self._fn = fn
        if support is not None:
            self._support = _frozen(np.asarray(support, dtype=np.int64))
            self._values = _frozen(np.asarray(values))
        else:
            self._support = None
            self._values = None

    # -- construction ---------------------------------------------------------

    @classmethod
    def from_function(cls, offset: int, fn: Callable, vectorized: bool = True) -> "ShiftOp":
        if not vectorized:
            scalar_fn = fn

            def fn(j, _f=scalar_fn):
                return np.array([_f(int(k)) for k in j])

        return cls(offset, fn=fn)

    @classmethod
    def from_table(cls, offset: int, table: Mapping[int, complex]) -> "ShiftOp":
        keys = np.fromiter((int(k) for k in table), dtype=np.int64, count=len(table))
        vals = np.array([table[k] for k in table]) if table else np.zeros(0)
        return cls._from_arrays(offset, keys, vals)

    @classmethod
    def _from_arrays(cls, offset: int, support: np.ndarray, values: np.ndarray) -> "ShiftOp":
        support = np.asarray(support, dtype=np.int64)
        values = np.asarray(values)
        if values.dtype.kind not in "fc":
            values = values.astype(float)
        keep = values != 0
        support, values = support[keep], values[keep]
        order = np.argsort(support, kind="stable")
        support, values = support[order], values[order]
        if support.size > 1 and np.any(np.diff(support) == 0):
            raise ValueError("duplicate support index in ShiftOp table")
        return cls(offset, support=support, values=values)

    @classmethod
    def zero(cls) -> "ShiftOp":
        return cls._from_arrays(0, np.zeros(0, dtype=np.int64), np.zeros(0))

    # -- inspection -----------------------------------------------------------

    @property
    def is_finite(self) -> bool:
        return self._support is not None

    @property
    def support(self) -> np.ndarray:
        if self._support is None:
            raise RepresentationError("infinite-support ShiftOp has no finite support")
        return self._support

    @property
    def values(self) -> np.ndarray:
        if self._values is None:
            raise RepresentationError("infinite-support ShiftOp has no value table")
        return self._values

    def coeff(self, j):
        """Coefficient c(j); accepts an int or an int array."""
        scalar = np.ndim(j) == 0
        idx = _index_array(j)
        if self._support is None:
            out = np.asarray(self._fn(idx))
            if out.shape != idx.shape:
                out = np.broadcast_to(out, idx.shape).copy()
        else:
            n = self._support.size
            if n == 0:
                out = np.zeros(idx.shape, dtype=self._values.dtype)
            else:
                pos = np.minimum(np.searchsorted(self._support, idx), n - 1)
                hit = self._support[pos] == idx
                out = np.where(hit, self._values[pos], 0)
        return out[0].item() if scalar else out

    def __repr__(self) -> str:
        if self._support is None:
            return f"ShiftOp(offset={self.offset}, fn={getattr(self._fn, '__name__', 'fn')})"
        items = ", ".join(f"{k}: {v:.6g}" for k, v in zip(self._support.tolist(), self._values.tolist()))
        return f"ShiftOp(offset={self.offset}, {{{items}}})"


class FiniteOp:
    """Finite-rank operator stored as finite ShiftOp diagonals keyed by offset."""

    __slots__ = ("_diagonals",)

    def __init__(self, diagonals: Mapping[int, ShiftOp]):
        for d, s in diagonals.items():
            if not s.is_finite or s.offset != d:
                raise ValueError("FiniteOp diagonals must be finite ShiftOps keyed by offset")
        self._diagonals = dict(sorted(diagonals.items()))

    @classmethod
    def from_matrix(cls, rows, cols, matrix) -> "Operator":
        """Operator with <e_rows[a], A e_cols[b]> = matrix[a, b], zero elsewhere."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        matrix = np.asarray(matrix)
        if matrix.shape != (rows.size, cols.size):
            raise ValueError(f"matrix shape {matrix.shape} does not match index sets")
        ra, ca = np.nonzero(matrix)
        r, c, v = rows[ra], cols[ca], matrix[ra, ca]
        acc = {}
        for d in np.unique(r - c):
            sel = (r - c) == d
            acc[int(d)] = ShiftOp._from_arrays(int(d), c[sel], v[sel])
        return _canonical(acc)

    @property
    def diagonals(self) -> dict[int, ShiftOp]:
        return dict(self._diagonals)

    def rows(self) -> np.ndarray:
        return np.unique(np.concatenate([s.support + d for d, s in self._diagonals.items()]))

    def cols(self) -> np.ndarray:
        return np.unique(np.concatenate([s.support for s in self._diagonals.values()]))

    def to_matrix(self):
        rows, cols = self.rows(), self.cols()
        dtype = np.result_type(*[s.values for s in self._diagonals.values()])
        mat = np.zeros((rows.size, cols.size), dtype=dtype)
        for d, s in self._diagonals.items():
            mat[np.searchsorted(rows, s.support + d), np.searchsorted(cols, s.support)] += s.values
        return rows, cols, mat

    def __repr__(self) -> str:
        return f"FiniteOp(offsets={list(self._diagonals)})"


class DenseOp:
    """Matrix on the window [-M, M]; row/column a corresponds to index a - M."""

    __slots__ = ("window", "_matrix")

    def __init__(self, window: IndexWindow | int, matrix):
        if isinstance(window, int):
            window = IndexWindow(window)
        matrix = np.asarray(matrix)
        if matrix.shape != (window.size, window.size):
            raise ValueError(f"expected {window.size}x{window.size} matrix, got {matrix.shape}")
        if matrix.dtype.kind not in "fc":
            matrix = matrix.astype(float)
        self.window = window
        self._matrix = _frozen(matrix)

    @property
    def matrix(self) -> np.ndarray:
        return self._matrix

    def entry(self, i: int, j: int):
        if not (self.window.contains(i) and self.window.contains(j)):
            return 0.0
        return self._matrix[i + self.window.M, j + self.window.M].item()

    def nonzero_rows(self) -> np.ndarray:
        return np.flatnonzero(np.any(self._matrix != 0, axis=1)) - self.window.M

    def nonzero_cols(self) -> np.ndarray:
        return np.flatnonzero(np.any(self._matrix != 0, axis=0)) - self.window.M

    def embed(self, M: int) -> "DenseOp":
        if M < self.window.M:
            raise WindowOverflow(f"cannot embed window {self.window.M} into smaller window {M}")
        if M == self.window.M:
            return self
        out = np.zeros((2 * M + 1, 2 * M + 1), dtype=self._matrix.dtype)
        k = M - self.window.M
        out[k : k + self.window.size, k : k + self.window.size] = self._matrix
        return DenseOp(M, out)

    def __repr__(self) -> str:
        return f"DenseOp(M={self.window.M})"


Operator = Union[ShiftOp, FiniteOp, DenseOp]


@dataclass(frozen=True)
class Projection:
    """Orthogonal projection P_m onto span{e_-m, ..., e_m}."""

    m: int

    def __post_init__(self):
        if self.m < 0:
            raise ValueError(f"projection rank parameter must be >= 0, got {self.m}")

    @property
    def operator(self) -> ShiftOp:
        return projection(self.m)


# -- standard operators -------------------------------------------------------


def _ones(j):
    return np.ones(j.shape)


def identity() -> ShiftOp:
    return ShiftOp(0, fn=_ones)


def scalar_identity(c: complex) -> ShiftOp:
    return ShiftOp(0, fn=lambda j: np.full(j.shape, c))


def bilateral_shift(power: int = 1) -> ShiftOp:
    """Unitary e_j -> e_{j+power}."""
    return ShiftOp(power, fn=_ones)


def projection(m: int) -> ShiftOp:
    idx = np.arange(-m, m + 1, dtype=np.int64)
    return ShiftOp._from_arrays(0, idx, np.ones(idx.size))


def rank_one(i: int, j: int, value: complex = 1.0) -> ShiftOp:
    """|e_i><e_j| scaled by value."""
    return ShiftOp._from_arrays(i - j, np.array([j]), np.array([value]))


def basis_vector(i: int) -> ShiftOp:
    """e_i as the operator e_i (x) e_0 (norms and walks act on it like a vector)."""
    return rank_one(i, 0)


def vector(entries: Mapping[int, complex]) -> Operator:
    """Finitely supported vector sum_i v_i e_i, stored as a column at index 0."""
    rows = np.array(sorted(entries), dtype=np.int64)
    vals = np.array([entries[int(r)] for r in rows]).reshape(-1, 1)
    return FiniteOp.from_matrix(rows, [0], vals)


# -- structural helpers -------------------------------------------------------


def _diagonals(op: Operator) -> dict[int, ShiftOp]:
    if isinstance(op, ShiftOp):
        return {op.offset: op}
    if isinstance(op, FiniteOp):
        return op.diagonals
    raise TypeError(f"no diagonal decomposition for {type(op).__name__}")


def _canonical(acc: Mapping[int, ShiftOp]) -> Operator:
    acc = {d: s for d, s in acc.items() if not (s.is_finite and s.support.size == 0)}
    if not acc:
        return ShiftOp.zero()
    if len(acc) == 1:
        return next(iter(acc.values()))
    return FiniteOp(acc)


def is_finite(op: Operator) -> bool:
    return not (isinstance(op, ShiftOp) and not op.is_finite)


def is_zero(op: Operator) -> bool:
    if isinstance(op, ShiftOp):
        return op.is_finite and op.support.size == 0
    if isinstance(op, FiniteOp):
        return False
    return not np.any(op.matrix)


def rows_of(op: Operator) -> np.ndarray:
    """Indices i with a nonzero entry in row i (the range lies in their span)."""
    if isinstance(op, ShiftOp):
        return op.support + op.offset
    if isinstance(op, FiniteOp):
        return op.rows()
    return op.nonzero_rows()


def cols_of(op: Operator) -> np.ndarray:
    """Indices j with a nonzero entry in column j."""
    if isinstance(op, ShiftOp):
        return op.support
    if isinstance(op, FiniteOp):
        return op.cols()
    return op.nonzero_cols()


def required_window(op: Operator) -> int:
    """Smallest M whose window holds every nonzero entry of a finite operator."""
    if not is_finite(op):
        raise RepresentationError("infinite-support operator fits in no finite window")
    r, c = rows_of(op), cols_of(op)
    if r.size == 0:
        return 0
    return int(max(np.abs(r).max(), np.abs(c).max()))


def entry(op: Operator, i: int, j: int):
    """Matrix element <e_i, op e_j>."""
    if isinstance(op, DenseOp):
        return op.entry(i, j)
    total = 0.0
    for d, s in _diagonals(op).items():
        if i == j + d:
            total += s.coeff(j)
    return total


def column(op: Operator, j: int) -> dict[int, complex]:
    """op e_j as a sparse mapping index -> coefficient (nonzero entries only)."""
    if isinstance(op, DenseOp):
        if not op.window.contains(j):
            return {}
        col = op.matrix[:, j + op.window.M]
        return {int(k) - op.window.M: col[k].item() for k in np.flatnonzero(col)}
    out = {}
    for d, s in _diagonals(op).items():
        c = s.coeff(j)
        if c != 0:
            out[j + d] = c
    return out


# -- algebra ------------------------------------------------------------------


def _compose_shifts(a: ShiftOp, b: ShiftOp) -> ShiftOp:
    offset = a.offset + b.offset
    if b.is_finite:
        idx = b.support
        return ShiftOp._from_arrays(offset, idx, a.coeff(idx + b.offset) * b.values)
    if a.is_finite:
        idx = a.support - b.offset
        return ShiftOp._from_arrays(offset, idx, a.values * b.coeff(idx))
    bd = b.offset

    def fn(j, _a=a, _b=b, _bd=bd):
        return _a.coeff(j + _bd) * _b.coeff(j)

    return ShiftOp(offset, fn=fn)


def _add_shifts(a: ShiftOp, b: ShiftOp) -> ShiftOp:
    if a.offset != b.offset:
        raise ValueError("diagonals with different offsets")
    if a.is_finite and b.is_finite:
        idx = np.union1d(a.support, b.support)
        return ShiftOp._from_arrays(a.offset, idx, a.coeff(idx) + b.coeff(idx))

    def fn(j, _a=a, _b=b):
        return _a.coeff(j) + _b.coeff(j)

    return ShiftOp(a.offset, fn=fn)


def _accumulate(acc: dict[int, ShiftOp], s: ShiftOp) -> None:
    if s.is_finite and s.support.size == 0:
        return
    acc[s.offset] = _add_shifts(acc[s.offset], s) if s.offset in acc else s


def _shift_rows_dense(s: ShiftOp, D: DenseOp) -> np.ndarray:
    """Matrix of s o D on D's window; raises if nonzero content leaves the window."""
    M = D.window.M
    out = np.zeros(D.matrix.shape, dtype=np.result_type(D.matrix, s.coeff(np.zeros(1, np.int64))))
    rows = D.nonzero_rows()
    if rows.size == 0:
        return out
    c = s.coeff(rows)
    live = c != 0
    rows, c = rows[live], c[live]
    target = rows + s.offset
    if np.any(np.abs(target) > M):
        bad = int(rows[np.abs(target) > M][0])
        raise WindowOverflow(f"row {bad} maps to {bad + s.offset}, outside window [-{M}, {M}]")
    out[target + M] = c[:, None] * D.matrix[rows + M]
    return out


def _dense_cols_shift(D: DenseOp, s: ShiftOp) -> np.ndarray:
    """Matrix of D o s: column j is c(j) * D[:, j + offset]."""
    M = D.window.M
    out = np.zeros(D.matrix.shape, dtype=np.result_type(D.matrix, s.coeff(np.zeros(1, np.int64))))
    cols = D.nonzero_cols()
    if cols.size == 0:
        return out
    src = cols - s.offset
    c = s.coeff(src)
    live = c != 0
    cols, src, c = cols[live], src[live], c[live]
    if np.any(np.abs(src) > M):
        bad = int(src[np.abs(src) > M][0])
        raise WindowOverflow(f"column {bad} is outside window [-{M}, {M}] after composition")
    out[:, src + M] = D.matrix[:, cols + M] * c[None, :]
    return out


def _compose_dense(a: Operator, b: Operator) -> DenseOp:
    M = max(op.window.M for op in (a, b) if isinstance(op, DenseOp))
    if isinstance(a, DenseOp) and isinstance(b, DenseOp):
        return DenseOp(M, a.embed(M).matrix @ b.embed(M).matrix)
    if isinstance(b, DenseOp):
        D = b.embed(M)
        mats = [_shift_rows_dense(s, D) for s in _diagonals(a).values()]
    else:
        D = a.embed(M)
        mats = [_dense_cols_shift(D, s) for s in _diagonals(b).values()]
    return DenseOp(M, sum(mats[1:], mats[0]))


def compose(a: Operator, b: Operator) -> Operator:
    """The product a o b (b acts first)."""
    if isinstance(a, DenseOp) or isinstance(b, DenseOp):
        return _compose_dense(a, b)
    if isinstance(a, ShiftOp) and isinstance(b, ShiftOp):
        return _compose_shifts(a, b)
    acc: dict[int, ShiftOp] = {}
    for x in _diagonals(a).values():
        for y in _diagonals(b).values():
            _accumulate(acc, _compose_shifts(x, y))
    return _canonical(acc)


def compose_all(*ops: Operator) -> Operator:
    """ops[0] o ops[1] o ... o ops[-1]."""
    out = ops[-1]
    for op in reversed(ops[:-1]):
        out = compose(op, out)
    return out


def scale(op: Operator, c: complex) -> Operator:
    if isinstance(op, DenseOp):
        return DenseOp(op.window, op.matrix * c)
    if isinstance(op, ShiftOp):
        if op.is_finite:
            return ShiftOp._from_arrays(op.offset, op.support, op.values * c)
        return ShiftOp(op.offset, fn=lambda j, _op=op: c * _op.coeff(j))
    return _canonical({d: scale(s, c) for d, s in op.diagonals.items()})


def add(a: Operator, b: Operator) -> Operator:
    if is_zero(b) and not isinstance(a, DenseOp):
        return a
    if is_zero(a) and not isinstance(b, DenseOp):
        return b
    if isinstance(a, DenseOp) or isinstance(b, DenseOp):
        M = max(op.window.M if isinstance(op, DenseOp) else required_window(op) for op in (a, b))
        return DenseOp(M, to_dense(a, M).matrix + to_dense(b, M).matrix)
    if isinstance(a, ShiftOp) and isinstance(b, ShiftOp) and a.offset == b.offset:
        return _add_shifts(a, b)
    if not (is_finite(a) and is_finite(b)):
        raise RepresentationError("sum of an infinite-support shift with a different diagonal")
    acc = dict(_diagonals(a))
    for s in _diagonals(b).values():
        _accumulate(acc, s)
    return _canonical(acc)


def sub(a: Operator, b: Operator) -> Operator:
    return add(a, scale(b, -1.0))


def adjoint(op: Operator) -> Operator:
    if isinstance(op, DenseOp):
        return DenseOp(op.window, op.matrix.conj().T)
    if isinstance(op, FiniteOp):
        return _canonical({-d: adjoint(s) for d, s in op.diagonals.items()})
    d = op.offset
    if op.is_finite:
        return ShiftOp._from_arrays(-d, op.support + d, np.conj(op.values))
    return ShiftOp(-d, fn=lambda j, _op=op: np.conj(_op.coeff(j - d)))


def inverse(op: Operator) -> ShiftOp:
    """Inverse of an infinite-support shift: offset -d, coefficient j -> 1/c(j - d)."""
    if not isinstance(op, ShiftOp) or op.is_finite:
        raise NotInvertible(f"{type(op).__name__} of finite rank is not invertible on H")
    d = op.offset

    def fn(j, _op=op):
        c = _op.coeff(j - d)
        if np.any(c == 0):
            raise NotInvertible(f"vanishing coefficient at index {int((j - d)[c == 0][0])}")
        return 1.0 / c

    return ShiftOp(-d, fn=fn)


def power(op: Operator, n: int) -> Operator:
    if n < 0:
        return power(inverse(op), -n)
    out: Operator = identity()
    for _ in range(n):
        out = compose(op, out)
    return out


# -- dense materialization ----------------------------------------------------


def to_dense(op: Operator, M: int | IndexWindow) -> DenseOp:
    """Exact materialization on [-M, M]; raises if any nonzero entry lies outside."""
    if isinstance(M, IndexWindow):
        M = M.M
    if isinstance(op, DenseOp):
        return op.embed(M)
    if not is_finite(op):
        raise RepresentationError("use compress() to truncate an infinite-support shift")
    need = required_window(op)
    if need > M:
        raise WindowOverflow(f"operator needs window {need}, have {M}")
    if isinstance(op, ShiftOp):
        mats = {op.offset: op}
    else:
        mats = op.diagonals
    vals = [s.values for s in mats.values()]
    out = np.zeros((2 * M + 1, 2 * M + 1), dtype=np.result_type(float, *vals))
    for d, s in mats.items():
        out[s.support + d + M, s.support + M] += s.values
    return DenseOp(M, out)


def compress(op: Operator, M: int | IndexWindow) -> DenseOp:
    """P_M op P_M as a dense matrix (an explicit truncation)."""
    w = M if isinstance(M, IndexWindow) else IndexWindow(M)
    if isinstance(op, DenseOp):
        if op.window.M <= w.M:
            return op.embed(w.M)
        k = op.window.M - w.M
        return DenseOp(w, op.matrix[k : k + w.size, k : k + w.size])
    idx = w.indices
    out = np.zeros((w.size, w.size), dtype=complex)
    for d, s in _diagonals(op).items():
        c = s.coeff(idx)
        ok = np.abs(idx + d) <= w.M
        out[idx[ok] + d + w.M, idx[ok] + w.M] += c[ok]
    if not np.any(out.imag):
        out = out.real
    return DenseOp(w, out)


# -- norms --------------------------------------------------------------------


def spectral_norm(matrix, method: str = "svd", rtol: float = 1e-12, max_iter: int = 100_000) -> float:
    """Largest singular value of a finite matrix.

    ``method="power"`` runs power iteration on A*A and stops once the Rayleigh
    quotient changes by less than ``rtol`` (relative); ``"svd"`` uses LAPACK.
    """
    A = np.asarray(matrix)
    if A.size == 0 or not np.any(A):
        return 0.0
    if method == "svd":
        return float(np.linalg.norm(A, 2))
    if method != "power":
        raise ValueError(f"unknown method {method!r}")
    B = A.conj().T @ A
    v = B[:, np.argmax(np.linalg.norm(B, axis=0))].astype(complex)
    v /= np.linalg.norm(v)
    lam = float(np.real(np.vdot(v, B @ v)))
    for _ in range(max_iter):
        w = B @ v
        nw = np.linalg.norm(w)
        if nw == 0:
            return 0.0
        v = w / nw
        new = float(np.real(np.vdot(v, B @ v)))
        if abs(new - lam) <= rtol * abs(new):
            return float(np.sqrt(max(new, 0.0)))
        lam = new
    raise NonConvergence(f"power iteration did not reach rtol={rtol} in {max_iter} steps")


def _finite_matrix(op: Operator) -> np.ndarray:
    if isinstance(op, DenseOp):
        M = op.window.M
        r, c = op.nonzero_rows(), op.nonzero_cols()
        return op.matrix[np.ix_(r + M, c + M)]
    if isinstance(op, ShiftOp):
        return np.diag(op.values)
    return op.to_matrix()[2]


def operator_norm(op: Operator, restriction: Projection | int | None = None, method: str = "svd") -> float:
    """Operator norm of ``op`` (or of ``op o P_m`` when a restriction is given).

    A finite shift's norm is max |c(j)| exactly, since distinct basis vectors
    have orthogonal images.  Other finite operators go through the singular
    value routine on their nonzero block.
    """
    if restriction is not None:
        m = restriction.m if isinstance(restriction, Projection) else int(restriction)
        op = compose(op, projection(m))
    if isinstance(op, ShiftOp):
        if not op.is_finite:
            raise RepresentationError("norm of an infinite-support shift needs a restriction")
        return float(np.max(np.abs(op.values))) if op.values.size else 0.0
    return spectral_norm(_finite_matrix(op), method=method)


def sup_coefficient(op: ShiftOp, indices) -> float:
    """max |c(j)| over the given basis indices (the norm of op restricted to them)."""
    return float(np.max(np.abs(op.coeff(_index_array(indices)))))


def frobenius_sq(op: Operator) -> float:
    """sum |a_ij|^2, i.e. trace(op* op), for a finite-rank operator."""
    if isinstance(op, DenseOp):
        return float(np.sum(np.abs(op.matrix) ** 2))
    if not is_finite(op):
        raise RepresentationError("trace of an infinite-support shift")
    return float(sum(np.sum(np.abs(s.values) ** 2) for s in _diagonals(op).values()))
