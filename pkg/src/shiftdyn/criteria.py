"""Finite-horizon checkers for the sufficient conditions on generalized weighted shifts.

Every checker returns a ``CriterionVerdict``.  A "No" means the condition was
not observed at the configured horizon; it never asserts that the operator
lacks the dynamical property.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from enum import Enum
from itertools import permutations
from typing import Any, Callable, Mapping, Sequence

import numpy as np

from .errors import InvalidParameter, StarConditionUnverified
from .furstenberg import FurstenbergFamily, ReturnSet
from .module import ModuleVector, module_norm
from .operators import (
    Operator,
    ShiftOp,
    add,
    adjoint,
    compose,
    frobenius_sq,
    operator_norm,
    projection,
    rows_of,
    sub,
    vector,
)
from .series import SeriesReport, SeriesTolerances, SeriesVerdict, classify_series
from .shifts import (
    Approximants,
    DisjointFamily,
    GeneralizedShift,
    IncreasingSequence,
    ProductWalk,
    WeightWalk,
    apply_left,
)


class Holds(str, Enum):
    YES = "Yes"
    NO = "No"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class EvidenceTable:
    columns: tuple[str, ...]
    rows: list[tuple] = field(default_factory=list)

    def column(self, name: str) -> np.ndarray:
        i = self.columns.index(name)
        return np.array([r[i] for r in self.rows])


@dataclass
class CriterionVerdict:
    criterion: str
    holds: Holds
    summary: str
    implications: list[str] = field(default_factory=list)
    tables: dict[str, EvidenceTable] = field(default_factory=dict)
    series: dict[tuple, SeriesReport] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    extra: dict[str, Any] = field(default_factory=dict)


def _limit_zero(values: Sequence[float], tol: float) -> tuple[bool, bool]:
    """(passes, strictly decreasing) for a sampled sequence that should tend to 0.

    Passing means the last value is below ``tol`` and the second half never
    increases.
    """
    v = np.asarray(values, dtype=float)
    half = v[len(v) // 2 :]
    steps = np.diff(half)
    nonincreasing = bool(np.all(steps <= 1e-15 * max(1.0, float(np.max(np.abs(half))))))
    decreasing = bool(np.all(np.diff(v) < 0))
    return bool(v[-1] < tol) and nonincreasing, decreasing


def _series_verdict(reports: Sequence[SeriesReport]) -> Holds:
    verdicts = {r.verdict for r in reports}
    if SeriesVerdict.DIVERGES in verdicts:
        return Holds.NO
    if verdicts == {SeriesVerdict.CONVERGES}:
        return Holds.YES
    return Holds.INCONCLUSIVE


def _series_table(reports: Mapping[tuple, SeriesReport], kind: str) -> EvidenceTable:
    table = EvidenceTable(("j", "k", "l", "term", "partial_sum"))
    for key, r in reports.items():
        if key[0] != kind:
            continue
        _, j, k = key
        for l, (t, s) in enumerate(zip(r.terms, r.partial_sums), start=1):
            table.rows.append((j, k, l, float(t), float(s)))
    return table


def _product_terms(
    shift: GeneralizedShift, j: int, n: int, L: int, op: Operator, rows: np.ndarray, backward: bool,
    measure: Callable[[Operator], float],
) -> np.ndarray:
    walk = WeightWalk(shift.W, j, rows, backward=backward)
    out = np.empty(L)
    for l in range(L):
        walk.advance(n)
        out[l] = measure(walk.apply(op))
    return out


def _approx_distances(approx: Approximants, J: int, k_count: int) -> np.ndarray:
    """max_j ||D_j^(k) - P_m|| for k = 1..k_count."""
    P = projection(approx.m)
    return np.array(
        [max(operator_norm(sub(approx(j, k), P)) for j in range(-J, J + 1)) for k in range(1, k_count + 1)]
    )


def check_fhc(
    shift: GeneralizedShift,
    J: int,
    m: int,
    nk: IncreasingSequence,
    approx: Approximants | None = None,
    L_max: int = 500,
    k_count: int = 8,
    tol: SeriesTolerances = SeriesTolerances(),
    approx_tol: float = 1e-6,
) -> CriterionVerdict:
    """Frequent hypercyclicity criterion: for every j in [-J, J] and sampled k,

        sum_l ||W_{j+l n_k} ... W_{j+1} D_j^(k)||^2   and
        sum_l ||W_{j-l n_k+1}^{-1} ... W_j^{-1} D_j^(k)||^2

    converge, and D_j^(k) -> P_m.  The unsquared forward series is reported as
    a diagnostic under the key ("forward_unsquared", j, k); it does not enter
    the verdict.
    """
    approx = approx or Approximants(m)
    if approx.m != m:
        raise InvalidParameter("approximant family built for a different m")
    series: dict[tuple, SeriesReport] = {}
    for j in range(-J, J + 1):
        rows = approx.rows(j)
        for k in range(1, k_count + 1):
            n = nk.term(k - 1)
            D = approx(j, k)
            fwd = _product_terms(shift, j, n, L_max, D, rows, False, operator_norm)
            bwd = _product_terms(shift, j, n, L_max, D, rows, True, operator_norm)
            series[("forward", j, k)] = classify_series(fwd**2, tol)
            series[("backward", j, k)] = classify_series(bwd**2, tol)
            series[("forward_unsquared", j, k)] = classify_series(fwd, tol)

    gating = [r for key, r in series.items() if key[0] != "forward_unsquared"]
    holds = _series_verdict(gating)
    dD = _approx_distances(approx, J, k_count)
    approx_ok, _ = _limit_zero(dD, approx_tol)
    if not approx_ok and holds is Holds.YES:
        holds = Holds.INCONCLUSIVE
    counts = {v.value: sum(r.verdict is v for r in gating) for v in SeriesVerdict}
    summary = (
        f"{len(gating)} squared series at L_max={L_max}: "
        + ", ".join(f"{c} {v}" for v, c in counts.items())
        + f"; max ||D - P_m|| at last k = {dD[-1]:.3g}"
    )
    if holds is not Holds.YES:
        summary += "; the criterion is not confirmed at this horizon"
    verdict = CriterionVerdict(
        "fhc",
        holds,
        summary,
        implications=["frequently hypercyclic", "chaotic", "mixing"] if holds is Holds.YES else [],
        series=series,
    )
    for kind in ("forward", "backward", "forward_unsquared"):
        verdict.tables[kind] = _series_table(series, kind)
    verdict.tables["approximants"] = EvidenceTable(("k", "dD"), [(k, float(v)) for k, v in enumerate(dD, 1)])
    return verdict


def check_chaos_equiv(
    shift: GeneralizedShift,
    J: int,
    m: int,
    nk: IncreasingSequence,
    approx: Approximants | None = None,
    L_max: int = 500,
    k_count: int = 8,
    tol: SeriesTolerances = SeriesTolerances(),
) -> CriterionVerdict:
    """Chaos condition for U = I: sum_l D* W* ... W* W ... W D converges for each j, k.

    The terms are positive operators of rank <= 2m+1, so the operator series
    converges iff its trace series sum_l ||W ... W D||_F^2 does; that scalar
    series is what gets classified.  The operator norm of the last-quarter
    partial sum is recorded alongside as the Cauchy difference.
    """
    if not shift.u_is_identity:
        raise InvalidParameter("the chaos characterization applies to U = identity only")
    approx = approx or Approximants(m)
    series: dict[tuple, SeriesReport] = {}
    cauchy = EvidenceTable(("j", "k", "tail_opnorm"))
    for j in range(-J, J + 1):
        rows = approx.rows(j)
        for k in range(1, k_count + 1):
            n = nk.term(k - 1)
            D = approx(j, k)
            walk = WeightWalk(shift.W, j, rows)
            terms = np.empty(L_max)
            q = (3 * L_max) // 4
            tail: Operator = ShiftOp.zero()
            for l in range(L_max):
                walk.advance(n)
                A = walk.apply(D)
                terms[l] = frobenius_sq(A)
                if l >= q:
                    tail = add(tail, compose(adjoint(A), A))
            series[("trace", j, k)] = classify_series(terms, tol)
            cauchy.rows.append((j, k, operator_norm(tail)))
    holds = _series_verdict(list(series.values()))
    worst = max(r[2] for r in cauchy.rows)
    summary = f"{len(series)} trace series at L_max={L_max}; largest last-quarter operator increment {worst:.3g}"
    verdict = CriterionVerdict(
        "chaos",
        holds,
        summary,
        implications=["chaotic", "chaotic <=> frequent hypercyclicity criterion holds (U = I)"]
        if holds is Holds.YES
        else [],
        series=series,
    )
    verdict.tables["trace"] = _series_table(series, "trace")
    verdict.tables["cauchy"] = cauchy
    return verdict


def _unitary_inverse_power(U: Operator, n: int) -> list[Operator]:
    return [adjoint(U)] * n


def check_star_condition(
    unitaries: Sequence[Operator], m: int, Nm_claim: int, probe_range: int = 50, atol: float = 1e-12
) -> CriterionVerdict:
    """P_m U_s^n U_l^{-n} P_m = 0 for every ordered pair s != l and n in [Nm_claim, Nm_claim + probe_range]."""
    if len(unitaries) < 2:
        raise InvalidParameter("condition (*) needs at least two unitaries")
    P = projection(m)
    table = EvidenceTable(("s", "l", "n", "norm"))
    failures = []
    for s, l in permutations(range(len(unitaries)), 2):
        for n in range(Nm_claim, Nm_claim + probe_range + 1):
            op = apply_left(_unitary_inverse_power(unitaries[l], n) + [unitaries[s]] * n, P)
            v = operator_norm(compose(P, op))
            table.rows.append((s + 1, l + 1, n, v))
            if v >= atol:
                failures.append((s + 1, l + 1, n))
    holds = Holds.NO if failures else Holds.YES
    summary = f"checked n in [{Nm_claim}, {Nm_claim + probe_range}] for m={m}"
    if failures:
        summary += f"; first failure (s, l, n) = {failures[0]}"
    return CriterionVerdict("star", holds, summary, tables={"star": table})


def check_disjoint(
    shifts: DisjointFamily | Sequence[GeneralizedShift],
    J: int,
    m: int,
    nk: IncreasingSequence,
    D: Approximants | None = None,
    G: Sequence[Approximants] | None = None,
    k_count: int = 8,
    Nm: int | None = None,
    probe_range: int = 50,
    tol: float = 1e-6,
) -> CriterionVerdict:
    """Dense disjoint hypercyclicity condition for N shifts, tabulated over k.

    Columns (max over j in [-J, J]): dD, dG_l, fwd_l, bwd_l and cross_s_l for
    s != l, where cross_s_l = ||W^(s)_j ... W^(s)_{j-n+1} W^(l)-1_{j-n+1} ... W^(l)-1_j G_l||.
    Yes when every column is below ``tol`` at the last k and non-increasing
    over the second half of the k range.
    """
    if isinstance(shifts, DisjointFamily):
        family = shifts
        shifts = family.shifts
        Nm = family.nm(m) if Nm is None else Nm
    shifts = tuple(shifts)
    N = len(shifts)
    Nm = 2 * m + 1 if Nm is None else Nm
    star = check_star_condition([s.U for s in shifts], m, Nm, probe_range)
    if star.holds is not Holds.YES:
        raise StarConditionUnverified(star.summary)
    D = D or Approximants(m)
    G = list(G) if G is not None else [Approximants(m) for _ in shifts]
    if len(G) != N:
        raise InvalidParameter(f"need {N} G families, got {len(G)}")

    labels = ["dD"] + [f"dG_{l}" for l in range(1, N + 1)]
    labels += [f"fwd_{l}" for l in range(1, N + 1)] + [f"bwd_{l}" for l in range(1, N + 1)]
    labels += [f"cross_{s}_{l}" for s, l in permutations(range(1, N + 1), 2)]
    table = EvidenceTable(("k", "n_k", "j") + tuple(labels))
    P = projection(m)
    for k in range(1, k_count + 1):
        n = nk.term(k - 1)
        for j in range(-J, J + 1):
            Dk = D(j, k)
            Gk = [g(j, k) for g in G]
            row = [operator_norm(sub(Dk, P))] + [operator_norm(sub(g, P)) for g in Gk]
            row += [operator_norm(WeightWalk(s.W, j, rows_of(Dk)).advance(n).apply(Dk)) for s in shifts]
            row += [
                operator_norm(WeightWalk(s.W, j, rows_of(g), backward=True).advance(n).apply(g))
                for s, g in zip(shifts, Gk)
            ]
            for a, b in permutations(range(N), 2):
                walk = ProductWalk(rows_of(Gk[b]))
                for t in range(n):
                    walk.push(shifts[b].W.inverse(j - t))
                for t in range(n):
                    walk.push(shifts[a].W[j - n + 1 + t])
                row.append(operator_norm(walk.apply(Gk[b])))
            table.rows.append((k, n, j, *row))

    worst = {}
    passed, failing_decreasing = [], []
    for name in labels:
        col = table.column(name).reshape(k_count, 2 * J + 1).max(axis=1)
        worst[name] = col
        ok, decreasing = _limit_zero(col, tol)
        passed.append(ok)
        if not ok:
            failing_decreasing.append(decreasing)
    if all(passed):
        holds = Holds.YES
    elif all(failing_decreasing):
        holds = Holds.INCONCLUSIVE
    else:
        holds = Holds.NO
    last = ", ".join(f"{name}={worst[name][-1]:.3g}" for name in labels)
    summary = f"condition (*) verified with N_m={Nm}; at n_k={nk.term(k_count - 1)}: {last}"
    verdict = CriterionVerdict(
        "disjoint",
        holds,
        summary,
        implications=["densely disjoint hypercyclic"] if holds is Holds.YES else [],
        tables={"disjoint": table, "star": star.tables["star"]},
    )
    verdict.extra["final"] = {name: float(worst[name][-1]) for name in labels}
    return verdict


def _sequence_terms(tn: IncreasingSequence, N: int) -> list[int]:
    if tn.bounded and len(tn.terms) < N + 1:
        raise InvalidParameter(f"t_n must be defined for every n <= {N}; got {len(tn.terms)} terms")
    return tn.take(N + 1)


def _family_implications(family: FurstenbergFamily) -> list[str]:
    out = [f"{family.label}-transitive"]
    if family.variant.value == "Cof":
        out.append("topologically mixing")
    return out


def check_f_transitivity(
    shift: GeneralizedShift,
    tn: IncreasingSequence,
    J: int,
    m: int,
    family: FurstenbergFamily,
    eps: float,
    N: int,
    D: Approximants | None = None,
    G: Approximants | None = None,
) -> CriterionVerdict:
    """Hit set of n <= N where the quadruple (||D-P_m||, ||G-P_m||, forward, backward) is below eps for all j."""
    if eps <= 0:
        raise InvalidParameter("eps must be positive")
    D = D or Approximants(m)
    G = G or Approximants(m)
    t = _sequence_terms(tn, N)
    P = projection(m)
    fwd_walks = {j: WeightWalk(shift.W, j, D.rows(j)) for j in range(-J, J + 1)}
    bwd_walks = {j: WeightWalk(shift.W, j, G.rows(j), backward=True) for j in range(-J, J + 1)}
    table = EvidenceTable(("n", "dD", "dG", "fwd", "bwd", "hit"))
    hits = []
    for n in range(N + 1):
        q = np.zeros(4)
        for j in range(-J, J + 1):
            Dn, Gn = D(j, n), G(j, n)
            fw = fwd_walks[j]
            fw.advance(t[n] - fw.length)
            bw = bwd_walks[j]
            bw.advance(t[n] - bw.length)
            vals = (
                operator_norm(sub(Dn, P)),
                operator_norm(sub(Gn, P)),
                operator_norm(fw.apply(Dn)),
                operator_norm(bw.apply(Gn)),
            )
            q = np.maximum(q, vals)
        hit = bool(np.all(q < eps))
        if hit:
            hits.append(n)
        table.rows.append((n, *map(float, q), int(hit)))
    rs = ReturnSet(tuple(hits), N)
    holds = Holds.YES if family.contains(rs) else Holds.NO
    first_tail = _tail_start(rs)
    summary = f"{len(hits)} of {N + 1} indices hit at eps={eps:g}; family {family.label}: {holds.value}"
    if first_tail is not None:
        summary += f"; every n >= {first_tail} hits"
    return CriterionVerdict(
        "ftrans",
        holds,
        summary,
        implications=_family_implications(family) if holds is Holds.YES else [],
        tables={"ftrans": table},
        extra={"hit_set": rs, "tail_start": first_tail},
    )


def _tail_start(rs: ReturnSet) -> int | None:
    """Smallest n0 with [n0, N] inside the set."""
    misses = np.flatnonzero(~rs.mask)
    n0 = int(misses[-1]) + 1 if misses.size else 0
    return n0 if n0 <= rs.horizon else None


def _default_distance(a, b) -> float:
    if isinstance(a, ModuleVector):
        return module_norm(a - b)
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def check_uniform_f_convergence(
    sequences: Mapping[Any, Sequence | Callable[[int], Any]],
    targets: Mapping[Any, Any],
    family: FurstenbergFamily,
    eps: float,
    N: int,
    distance: Callable[[Any, Any], float] = _default_distance,
) -> CriterionVerdict:
    """Is there one set in the family along which every sequence is eps-close to its target?

    The largest candidate is the intersection of the per-sequence hit sets,
    and families are hereditary upward, so testing it decides the question.
    """
    if set(sequences) != set(targets):
        raise InvalidParameter("sequences and targets must share the same index set")
    common = np.ones(N + 1, dtype=bool)
    per_index = {}
    for i, seq in sequences.items():
        get = seq if callable(seq) else seq.__getitem__
        mask = np.array([distance(get(n), targets[i]) < eps for n in range(N + 1)])
        per_index[i] = int(mask.sum())
        common &= mask
    rs = ReturnSet.from_mask(common)
    holds = Holds.YES if family.contains(rs) else Holds.NO
    summary = f"common hit set has {len(rs)} of {N + 1} indices; family {family.label}: {holds.value}"
    return CriterionVerdict("uniform", holds, summary, extra={"hit_set": rs, "per_index_hits": per_index})


SampleSets = Mapping[int, Sequence[Any]] | Sequence[Any]


def _as_vector(v) -> Operator:
    if isinstance(v, Mapping):
        return vector(v)
    return v


def _samples_for(samples: SampleSets, j: int) -> list[Operator]:
    chosen = samples.get(j, []) if isinstance(samples, Mapping) else samples
    return [_as_vector(v) for v in chosen]


def check_sampled_3_9(
    shift: GeneralizedShift,
    tn: IncreasingSequence,
    J: int,
    H1: SampleSets,
    H2: SampleSets,
    family: FurstenbergFamily,
    eps: float,
    N: int,
) -> CriterionVerdict:
    """Pointwise decay on finite samples of the unit ball.

    n is a hit when ||W_{j+t_n} ... W_{j+1} x|| < eps for every x in H1_j and
    ||W_{j-t_n+1}^{-1} ... W_j^{-1} y|| < eps for every y in H2_j, all j.
    Samples are column vectors: operators supported in column 0 or
    {index: value} mappings.  A finite sample cannot establish density, so a
    Yes here is evidence, not a proof.
    """
    t = _sequence_terms(tn, N)
    found = []
    walks = []
    for j in range(-J, J + 1):
        for samples, backward in ((_samples_for(H1, j), False), (_samples_for(H2, j), True)):
            for v in samples:
                if operator_norm(v) > 1 + 1e-12:
                    raise InvalidParameter("sample vectors must lie in the closed unit ball")
                found.append(v)
            if samples:
                rows = np.unique(np.concatenate([rows_of(v) for v in samples]))
                walks.append((WeightWalk(shift.W, j, rows, backward=backward), samples))
    notes = []
    if not found:
        msg = "sample sets are empty; the verdict is vacuous"
        warnings.warn(msg, stacklevel=2)
        notes.append(msg)
    table = EvidenceTable(("n", "max_norm", "hit"))
    hits = []
    for n in range(N + 1):
        worst = 0.0
        for walk, samples in walks:
            walk.advance(t[n] - walk.length)
            worst = max(worst, max(operator_norm(walk.apply(v)) for v in samples))
        hit = worst < eps
        if hit:
            hits.append(n)
        table.rows.append((n, worst, int(hit)))
    rs = ReturnSet(tuple(hits), N)
    holds = Holds.YES if family.contains(rs) else Holds.NO
    summary = f"{len(found)} samples; {len(hits)} of {N + 1} indices hit; family {family.label}: {holds.value}"
    return CriterionVerdict(
        "sampled",
        holds,
        summary,
        implications=[f"evidence for {family.label}-transitivity"] if holds is Holds.YES else [],
        tables={"sampled": table},
        warnings=notes,
        extra={"hit_set": rs},
    )
