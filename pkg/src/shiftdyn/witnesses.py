"""Explicit vectors from the constructive proofs: periodic points, transitivity and
disjoint-transitivity witnesses, and the return sets they certify."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations
from typing import Callable, Mapping, Sequence


from .criteria import Holds, check_star_condition
from .errors import InvalidParameter, StarConditionUnverified, SupportCollision
from .furstenberg import ReturnSet
from .module import FjmSpec, ModuleVector, in_fjm, module_norm
from .operators import Operator, compose, operator_norm, projection, rows_of, sub
from .shifts import (
    GeneralizedShift,
    ProductWalk,
    WeightWalk,
    iterate_S,
    iterate_T,
    right_power,
)

PerCoordinate = Operator | Mapping[int, Operator] | None


@dataclass
class WitnessReport:
    witness: ModuleVector
    n: int
    input_error: float
    output_errors: list[float]
    input_bound: float
    output_bounds: list[float]
    premise: bool = False
    premise_threshold: float = float("nan")
    quadruple: dict[str, float] = field(default_factory=dict)

    @property
    def max_error(self) -> float:
        return max([self.input_error, *self.output_errors])


# -- periodic points ----------------------------------------------------------


def periodic_extension(shift: GeneralizedShift, block: ModuleVector, n: int, L: int) -> ModuleVector:
    """Extend a block by y_{j+ln} = W_{j+ln}..W_{j+1} y_j U^{ln} and
    y_{j-ln} = W_{j-ln+1}^{-1}..W_j^{-1} y_j U^{-ln}, l = 1..L.

    For U = I this is the periodic point used for chaos; for other U it is the
    same recipe carried over, and T^n fixes the result on interior coordinates.
    """
    if n < 1 or L < 0:
        raise InvalidParameter(f"need n >= 1 and L >= 0, got n={n}, L={L}")
    supp = block.support
    if supp and supp[-1] - supp[0] >= n:
        raise InvalidParameter(f"block spans {supp[-1] - supp[0] + 1} coordinates, more than the period {n}")
    coords: dict[int, Operator] = {}
    for j, y in block.items():
        coords[j] = y
        rows = rows_of(y)
        fwd = WeightWalk(shift.W, j, rows)
        bwd = WeightWalk(shift.W, j, rows, backward=True)
        for l in range(1, L + 1):
            coords[j + l * n] = right_power(fwd.advance(n).apply(y), shift.U, l * n)
            coords[j - l * n] = right_power(bwd.advance(n).apply(y), shift.U_star, l * n)
    return ModuleVector(coords)


def periodic_residual(shift: GeneralizedShift, y: ModuleVector, n: int) -> float:
    """max ||(T^n y)_i - y_i|| over coordinates i whose preimage i - n lies inside the truncation."""
    supp = y.support
    if not supp:
        return 0.0
    lo, hi = supp[0], supp[-1]
    image = iterate_T(shift, n, y)
    worst = 0.0
    for i in range(lo + n, hi + 1):
        worst = max(worst, operator_norm(sub(image[i], y[i])))
    return worst


# -- transitivity witnesses ---------------------------------------------------


def _per_coordinate(spec: FjmSpec, ops: PerCoordinate) -> dict[int, Operator]:
    P = projection(spec.m)
    if ops is None:
        return {j: P for j in spec.coordinates}
    if isinstance(ops, Mapping):
        return {j: ops.get(j, P) for j in spec.coordinates}
    return {j: ops for j in spec.coordinates}


def _coordinate_norms(x: ModuleVector, spec: FjmSpec) -> dict[int, float]:
    return {j: (operator_norm(x[j]) if j in x else 0.0) for j in spec.coordinates}


def _check_inputs(spec: FjmSpec, vectors: Sequence[ModuleVector]) -> None:
    for v in vectors:
        if not in_fjm(v, spec):
            raise InvalidParameter(f"input vector is not in F_(J={spec.J}, m={spec.m})")


def transitivity_witness(
    shift: GeneralizedShift,
    x: ModuleVector,
    y: ModuleVector,
    t: int,
    spec: FjmSpec,
    D: PerCoordinate = None,
    G: PerCoordinate = None,
    eps: float | None = None,
) -> WitnessReport:
    """eta = u + S^t v with u_j = D_j x_j and v_j = G_j y_j on [-J, J].

    Reports ||eta - x|| and ||T^t eta - y|| together with the bounds
    sum_j (||D_j - P_m|| ||x_j|| + back_j ||y_j||) and
    sum_j (||G_j - P_m|| ||y_j|| + fwd_j ||x_j||).  With ``eps`` given,
    ``premise`` records whether every quadruple entry is below
    eps / (2 (2J+1) max(||x||, ||y||, 1)), in which case both errors are < eps.
    """
    if t <= 2 * spec.J:
        raise SupportCollision(f"t={t} must exceed 2J={2 * spec.J} so the two summands do not overlap")
    _check_inputs(spec, (x, y))
    Dj, Gj = _per_coordinate(spec, D), _per_coordinate(spec, G)
    u = ModuleVector({j: compose(Dj[j], x[j]) for j in spec.coordinates if j in x})
    v = ModuleVector({j: compose(Gj[j], y[j]) for j in spec.coordinates if j in y})
    eta = u + iterate_S(shift, t, v)
    input_error = module_norm(eta - x)
    output_error = module_norm(iterate_T(shift, t, eta) - y)

    P = projection(spec.m)
    xn, yn = _coordinate_norms(x, spec), _coordinate_norms(y, spec)
    q = {"dD": 0.0, "dG": 0.0, "fwd": 0.0, "bwd": 0.0}
    bound_in = bound_out = 0.0
    for j in spec.coordinates:
        dD = operator_norm(sub(Dj[j], P))
        dG = operator_norm(sub(Gj[j], P))
        fwd = operator_norm(WeightWalk(shift.W, j, rows_of(Dj[j])).advance(t).apply(Dj[j]))
        bwd = operator_norm(WeightWalk(shift.W, j, rows_of(Gj[j]), backward=True).advance(t).apply(Gj[j]))
        for key, val in zip(q, (dD, dG, fwd, bwd)):
            q[key] = max(q[key], val)
        bound_in += dD * xn[j] + bwd * yn[j]
        bound_out += dG * yn[j] + fwd * xn[j]

    report = WitnessReport(eta, t, input_error, [output_error], bound_in, [bound_out], quadruple=q)
    if eps is not None:
        scale = max(module_norm(x), module_norm(y), 1.0)
        report.premise_threshold = eps / (2 * (2 * spec.J + 1) * scale)
        report.premise = max(q.values()) < report.premise_threshold
    return report


def disjoint_witness(
    shifts: Sequence[GeneralizedShift],
    x: ModuleVector,
    targets: Sequence[ModuleVector],
    n: int,
    spec: FjmSpec,
    D: PerCoordinate = None,
    G: Sequence[PerCoordinate] | None = None,
    Nm: int | None = None,
    check_star: bool = True,
) -> WitnessReport:
    """phi = u + sum_l S_l^n v_l with u_j = D_j x_j and (v_l)_j = G_{l,j} y^(l)_j.

    Output error l is ||T_l^n phi - y^(l)||.  Its bound adds the cross terms
    ||W^(l)_j..W^(l)_{j-n+1} W^(s)-1_{j-n+1}..W^(s)-1_j G_s|| ||y^(s)_j|| for s != l.
    """
    N = len(shifts)
    if len(targets) != N:
        raise InvalidParameter(f"need {N} targets, got {len(targets)}")
    Nm = 2 * spec.m + 1 if Nm is None else Nm
    if n <= 2 * spec.J or (N > 1 and n <= Nm):
        raise SupportCollision(f"n={n} must exceed 2J={2 * spec.J} and N_m={Nm}")
    if check_star and N > 1:
        star = check_star_condition([s.U for s in shifts], spec.m, Nm)
        if star.holds is not Holds.YES:
            raise StarConditionUnverified(star.summary)
    _check_inputs(spec, (x, *targets))
    Dj = _per_coordinate(spec, D)
    Gs = [_per_coordinate(spec, g) for g in (G or [None] * N)]

    u = ModuleVector({j: compose(Dj[j], x[j]) for j in spec.coordinates if j in x})
    vs = [
        ModuleVector({j: compose(g[j], y[j]) for j in spec.coordinates if j in y}) for g, y in zip(Gs, targets)
    ]
    phi = u
    for s, v in zip(shifts, vs):
        phi = phi + iterate_S(s, n, v)
    input_error = module_norm(phi - x)
    output_errors = [module_norm(iterate_T(s, n, phi) - y) for s, y in zip(shifts, targets)]

    P = projection(spec.m)
    xn = _coordinate_norms(x, spec)
    yn = [_coordinate_norms(y, spec) for y in targets]
    bound_in = 0.0
    bounds_out = [0.0] * N
    for j in spec.coordinates:
        bound_in += operator_norm(sub(Dj[j], P)) * xn[j]
        for l, s in enumerate(shifts):
            g = Gs[l][j]
            bwd = operator_norm(WeightWalk(s.W, j, rows_of(g), backward=True).advance(n).apply(g))
            fwd = operator_norm(WeightWalk(s.W, j, rows_of(Dj[j])).advance(n).apply(Dj[j]))
            bound_in += bwd * yn[l][j]
            bounds_out[l] += operator_norm(sub(g, P)) * yn[l][j] + fwd * xn[j]
        for l, s in permutations(range(N), 2):
            g = Gs[s][j]
            walk = ProductWalk(rows_of(g))
            for t in range(n):
                walk.push(shifts[s].W.inverse(j - t))
            for t in range(n):
                walk.push(shifts[l].W[j - n + 1 + t])
            bounds_out[l] += operator_norm(walk.apply(g)) * yn[s][j]
    return WitnessReport(phi, n, input_error, output_errors, bound_in, bounds_out)


Builder = Callable[..., WitnessReport]


def return_set_scan(
    shift: GeneralizedShift,
    x: ModuleVector,
    y: ModuleVector,
    spec: FjmSpec,
    eps: float,
    N: int,
    builder: Builder = transitivity_witness,
    D: PerCoordinate = None,
    G: PerCoordinate = None,
) -> ReturnSet:
    """Certified members of N(B(x, eps), B(y, eps)) up to N.

    n is included when the witness built for t = n lands within eps of both x
    and y.  A failed witness does not exclude n, so this is an inner
    approximation of the return set.
    """
    if eps <= 0:
        raise InvalidParameter("eps must be positive")
    members = []
    for n in range(2 * spec.J + 1, N + 1):
        r = builder(shift, x, y, n, spec, D=D, G=G)
        if r.max_error < eps:
            members.append(n)
    return ReturnSet(tuple(members), N)
