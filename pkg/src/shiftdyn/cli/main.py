"""Command-line entry point: ``shiftdyn <subcommand> [--config F] [--out P] [--format csv|kv]``."""

from __future__ import annotations

import argparse
import sys
import time
from pathlib import Path
from typing import Callable, Optional

import numpy as np

from .. import criteria, witnesses
from ..criteria import CriterionVerdict, EvidenceTable
from ..errors import ConfigInvalid, ShiftDynError
from ..furstenberg import FurstenbergFamily, lower_density
from ..module import FjmSpec, ModuleVector, make_fjm_vector, random_fjm
from ..operators import ShiftOp, compose, operator_norm, projection, scalar_identity, to_dense
from ..series import SeriesTolerances
from ..shifts import (
    GeneralizedShift,
    IncreasingSequence,
    family_constant,
    family_custom,
    family_example_3_2,
    family_example_3_6,
    family_example_3_11,
    forward_product_norm,
    unitary,
)
from .config import RunConfig, load_config
from .report import RunReport, Table, write_report

SUBCOMMANDS = ("norms", "fhc", "chaos", "disjoint", "star", "ftrans", "witness", "scan", "periodic")


# -- building objects from config ---------------------------------------------


def build_shift(cfg: RunConfig) -> GeneralizedShift:
    f = cfg.family
    U = unitary(f.unitary)
    if f.name == "example_3_2":
        return family_example_3_2(U)
    if f.name == "example_3_11":
        return family_example_3_11(f.alpha, U)
    if f.name == "constant":
        op = scalar_identity(f.constant)
        if f.offset:
            op = ShiftOp(f.offset, fn=lambda j, c=f.constant: np.full(j.shape, c))
        return family_constant(op, U)
    if f.name == "custom":
        return family_custom(f.offset, f.table, U)
    raise ConfigInvalid([f"family.name: {f.name} defines a pair; this subcommand needs a single shift"])


def build_pair(cfg: RunConfig):
    if cfg.family.name != "example_3_6":
        raise ConfigInvalid([f"family.name: disjoint runs need example_3_6, got {cfg.family.name}"])
    return family_example_3_6(cfg.family.pair)


def build_sequence(sc) -> IncreasingSequence:
    if sc.terms is not None:
        return IncreasingSequence.explicit(sc.terms)
    return IncreasingSequence.arithmetic(sc.start, sc.step)


def build_family(cfg: RunConfig) -> FurstenbergFamily:
    f = cfg.furstenberg
    return FurstenbergFamily(f.variant, f.delta, k_inf=f.k_inf, k_tail=f.k_tail)


def series_tolerances(cfg: RunConfig) -> SeriesTolerances:
    t = cfg.tolerances
    return SeriesTolerances(t.divergence_bound, t.cauchy, t.ratio_limit, t.raabe_converge)


def sample_vectors(cfg: RunConfig, count: int) -> list[ModuleVector]:
    spec = FjmSpec(cfg.window.J, cfg.window.m)
    if cfg.witness.seed is None:
        return [make_fjm_vector(spec) for _ in range(count)]
    rng = np.random.default_rng(cfg.witness.seed)
    return [random_fjm(spec, rng) for _ in range(count)]


def _table(t: EvidenceTable) -> Table:
    return Table(columns=list(t.columns), rows=[list(r) for r in t.rows])


def _from_verdict(v: CriterionVerdict, **values) -> dict:
    return dict(
        verdict=v.holds.value,
        summary=v.summary,
        implications=v.implications,
        warnings=v.warnings,
        tables={name: _table(t) for name, t in v.tables.items()},
        values=values,
    )


# -- subcommands ----------------------------------------------------------------


def closed_form_3_2(i: int, m: int, l: int) -> Optional[float]:
    """Closed-form ||W_{i+l} ... W_{i+1} P_m|| for the first example family, where it applies."""
    if i >= 0:
        return (i + m + 1) ** 2 / ((i + 1) * (i + l + 1)) if l > m else None
    return (m - i) ** 2 / ((-i) * (i + l + 1)) if l >= m - 2 * i - 1 else None


def run_norms(cfg: RunConfig) -> dict:
    shift = build_shift(cfg)
    n = cfg.norms
    m = cfg.window.m
    P = projection(m)
    is_32 = cfg.family.name == "example_3_2"
    columns = ["i", "m", "l", "numeric", "closed_form", "abs_diff"] + (["dense"] if n.dense else [])
    rows, worst = [], 0.0
    for i in range(n.i_min, n.i_max + 1):
        for l in range(n.l_min, n.l_max + 1):
            v = forward_product_norm(shift.W, i, l, P)
            cf = closed_form_3_2(i, m, l) if is_32 else None
            diff = abs(v - cf) if cf is not None else None
            if diff is not None:
                worst = max(worst, diff)
            row = [i, m, l, v, cf, diff]
            if n.dense:
                row.append(_dense_product_norm(shift, i, l, m, cfg.truncation.M))
            rows.append(row)
    if is_32:
        verdict = "Yes" if worst < 1e-10 else "No"
        summary = f"max |numeric - closed form| = {worst:.3g} over rows where the closed form applies"
    else:
        verdict = "Yes"
        summary = "product norms tabulated; no closed form for this family"
    return dict(verdict=verdict, summary=summary, tables={"norms": Table(columns=columns, rows=rows)},
                values={"max_abs_diff": worst if is_32 else None})


def _dense_product_norm(shift: GeneralizedShift, i: int, l: int, m: int, M: int) -> float:
    A = to_dense(projection(m), M)
    for t in range(1, l + 1):
        A = compose(shift.W[i + t], A)
    return operator_norm(A)


def run_fhc(cfg: RunConfig) -> dict:
    v = criteria.check_fhc(
        build_shift(cfg), cfg.window.J, cfg.window.m, build_sequence(cfg.sequences.nk),
        L_max=cfg.horizons.L_max, k_count=cfg.horizons.k_count, tol=series_tolerances(cfg),
        approx_tol=cfg.tolerances.limit_zero,
    )
    unsq = {r.verdict.value for key, r in v.series.items() if key[0] == "forward_unsquared"}
    return _from_verdict(v, unsquared_forward=",".join(sorted(unsq)))


def run_chaos(cfg: RunConfig) -> dict:
    v = criteria.check_chaos_equiv(
        build_shift(cfg), cfg.window.J, cfg.window.m, build_sequence(cfg.sequences.nk),
        L_max=cfg.horizons.L_max, k_count=cfg.horizons.k_count, tol=series_tolerances(cfg),
    )
    return _from_verdict(v)


def run_disjoint(cfg: RunConfig) -> dict:
    v = criteria.check_disjoint(
        build_pair(cfg), cfg.window.J, cfg.window.m, build_sequence(cfg.sequences.nk),
        k_count=cfg.horizons.k_count, Nm=cfg.star.Nm, probe_range=cfg.star.probe, tol=cfg.tolerances.limit_zero,
    )
    return _from_verdict(v, **v.extra["final"])


def run_star(cfg: RunConfig) -> dict:
    m = cfg.star.m if cfg.star.m is not None else cfg.window.m
    if cfg.star.unitaries:
        us = [unitary(u) for u in cfg.star.unitaries]
    else:
        us = build_pair(cfg).unitaries
    Nm = cfg.star.Nm if cfg.star.Nm is not None else 2 * m + 1
    return _from_verdict(criteria.check_star_condition(us, m, Nm, cfg.star.probe), m=m, Nm=Nm)


def run_ftrans(cfg: RunConfig) -> dict:
    v = criteria.check_f_transitivity(
        build_shift(cfg), build_sequence(cfg.sequences.tn), cfg.window.J, cfg.window.m,
        build_family(cfg), cfg.tolerances.eps, cfg.horizons.N,
    )
    return _from_verdict(v, tail_start=v.extra["tail_start"], hits=len(v.extra["hit_set"]))


def run_witness(cfg: RunConfig) -> dict:
    spec = FjmSpec(cfg.window.J, cfg.window.m)
    if cfg.family.name == "example_3_6":
        fam = build_pair(cfg)
        x, *ys = sample_vectors(cfg, 1 + len(fam.shifts))

        def build(n):
            return witnesses.disjoint_witness(fam.shifts, x, ys, n, spec, Nm=cfg.star.Nm)

        count = len(fam.shifts)
    else:
        shift = build_shift(cfg)
        x, y = sample_vectors(cfg, 2)

        def build(n):
            return witnesses.transitivity_witness(shift, x, y, n, spec, eps=cfg.tolerances.eps)

        count = 1
    columns = ["n_k", "input_err"] + [f"output_err_{l}" for l in range(1, count + 1)]
    rows = []
    for n in cfg.witness.n_k:
        r = build(n)
        rows.append([n, r.input_error, *r.output_errors])
    last = rows[-1]
    worst = max(last[1:])
    verdict = "Yes" if worst < cfg.tolerances.eps else "No"
    summary = f"largest error at n_k={last[0]}: {worst:.3g} (eps={cfg.tolerances.eps:g})"
    return dict(verdict=verdict, summary=summary, tables={"witness": Table(columns=columns, rows=rows)},
                values={"max_error": worst})


def run_scan(cfg: RunConfig) -> dict:
    spec = FjmSpec(cfg.window.J, cfg.window.m)
    shift = build_shift(cfg)
    x, y = sample_vectors(cfg, 2)
    rs = witnesses.return_set_scan(shift, x, y, spec, cfg.tolerances.eps, cfg.horizons.N)
    fam = build_family(cfg)
    density = lower_density(rs)
    member = fam.contains(rs)
    rows = [[n, int(n in set(rs.members))] for n in range(rs.horizon + 1)]
    summary = (
        f"{len(rs)} certified members in [0, {rs.horizon}]; lower density {density:.4g}; "
        f"family {fam.label}: {'Yes' if member else 'No'}"
    )
    return dict(
        verdict="Yes" if member else "No",
        summary=summary,
        warnings=["certified members only: a failed witness does not exclude n"],
        tables={"scan": Table(columns=["n", "certified"], rows=rows)},
        values={"lower_density": density, "members": len(rs)},
    )


def run_periodic(cfg: RunConfig) -> dict:
    shift = build_shift(cfg)
    p = cfg.periodic
    block = ModuleVector({0: projection(cfg.window.m)})
    y = witnesses.periodic_extension(shift, block, p.n, p.L)
    residual = witnesses.periodic_residual(shift, y, p.n)
    rows = [[j, operator_norm(op)] for j, op in y.items()]
    warns = [] if shift.u_is_identity else ["U is not the identity: extension beyond the U = I construction"]
    return dict(
        verdict="Yes" if residual < 1e-10 else "No",
        summary=f"interior residual max ||(T^n y)_i - y_i|| = {residual:.3g} for n={p.n}, L={p.L}",
        warnings=warns,
        tables={"periodic": Table(columns=["coordinate", "norm"], rows=rows)},
        values={"residual": residual},
    )


RUNNERS: dict[str, Callable[[RunConfig], dict]] = {
    "norms": run_norms,
    "fhc": run_fhc,
    "chaos": run_chaos,
    "disjoint": run_disjoint,
    "star": run_star,
    "ftrans": run_ftrans,
    "witness": run_witness,
    "scan": run_scan,
    "periodic": run_periodic,
}


def run(config: RunConfig, subcommand: str) -> RunReport:
    if subcommand not in RUNNERS:
        raise ConfigInvalid([f"unknown subcommand {subcommand!r}"])
    start = time.perf_counter()
    fields = RUNNERS[subcommand](config)
    elapsed = time.perf_counter() - start
    return RunReport(
        subcommand=subcommand,
        config=config.model_dump(mode="json"),
        timings={"total_s": elapsed} if config.output.timings else None,
        **fields,
    )


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="shiftdyn", description=__doc__)
    p.add_argument("subcommand", choices=SUBCOMMANDS)
    p.add_argument("--config", type=Path, help="TOML run configuration (defaults apply when omitted)")
    p.add_argument("--out", type=Path, help="output path; stdout when omitted")
    p.add_argument("--format", choices=("csv", "kv"), default="kv")
    return p


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        report = run(cfg, args.subcommand)
        write_report(report, args.format, args.out)
    except ConfigInvalid as exc:
        for e in exc.errors:
            print(f"shiftdyn: config error: {e}", file=sys.stderr)
        return 2
    except (ShiftDynError, OSError) as exc:
        print(f"shiftdyn {args.subcommand}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
