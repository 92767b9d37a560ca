"""Command-line front end.

Exit codes: 0 success / consistent, 1 inconsistency found, 2 usage or input error.
"""

from __future__ import annotations

import argparse
import json
import random
import sys
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from . import classify as cl
from .consistency import numeric_residual, residual_is_zero, second_stage_residual, zero_state
from .exactpoly import Inconsistent, RationalMatrix, parse_rational
from .gauge import GaugeTransformation, KernelParameters, conjugate, kernel_element, normal_form
from .lattice import (
    SYMMETRIC,
    MapFamily,
    ParseError,
    PointState,
    ValidationError,
    dumps_family,
    enumerate_faces,
    load_map_family,
    parse_face_label,
    var_name,
)
from .maps import EXACT, FLOAT, MAPS, DomainError, expand_darboux

OK, FAIL, USAGE = 0, 1, 2


class UsageError(Exception):
    pass


@dataclass
class RunConfig:
    command: str
    order: int | None = None
    input: str | None = None
    output: str | None = None
    seed: int = 0
    trials: int = 100
    tolerance: float = 1e-10
    mode: str | None = None
    dump_matrix: bool = False
    json: bool = False
    verbose: int = 0

    def validate(self) -> None:
        if self.order is not None and self.order < 2:
            raise UsageError("--order must be >= 2")
        if self.trials < 1:
            raise UsageError("--trials must be >= 1")
        if not self.tolerance > 0:
            raise UsageError("--tolerance must be > 0")


def _emit(cfg: RunConfig, report: dict, summary: list[str]) -> None:
    if cfg.output and cfg.command not in ("expand-darboux", "gauge-apply"):
        Path(cfg.output).write_text(json.dumps(report, indent=1) + "\n")
    if cfg.json:
        print(json.dumps(report, indent=1))
    else:
        print("\n".join(summary))


def _load(cfg: RunConfig) -> MapFamily:
    if not cfg.input:
        raise UsageError("an input map-family file is required")
    return load_map_family(cfg.input)


def _at_order(fam: MapFamily, order: int | None) -> MapFamily:
    if order is None or order == fam.order:
        return fam
    if order < fam.order:
        return fam.truncated(order)
    return fam.with_order(order)


def _table(header: list[str], rows: list[list[object]]) -> list[str]:
    cells = [header] + [[str(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    fmt = lambda r: "  ".join(c.ljust(w) for c, w in zip(r, widths)).rstrip()
    return [fmt(cells[0]), fmt(["-" * w for w in widths])] + [fmt(r) for r in cells[1:]]


# -- commands --------------------------------------------------------------


def cmd_verify(cfg: RunConfig) -> int:
    fam = _at_order(_load(cfg), cfg.order)
    report = second_stage_residual(fam, fam.order)
    doc = report.to_json()
    rows = []
    for (face, k, l), by in report.residuals.items():
        nz = [d for d, p in by.items() if p]
        rows.append([str(face), f"({k},{l})", "zero" if not nz else f"nonzero at degree {nz[0]}"])
    summary = [f"4D consistency through degree {report.max_degree}: "
               f"{'CONSISTENT' if residual_is_zero(report) else 'INCONSISTENT'}"]
    summary += _table(["face", "pair", "residual"], rows)
    if report.first_failure:
        d, (face, k, l) = report.first_failure
        summary.append(f"first failure: degree {d}, face {face}, pair ({k},{l}): "
                       f"{report.residuals[(face, k, l)][d].format(var_name)}")
    _emit(cfg, doc, summary)
    return OK if residual_is_zero(report) else FAIL


def cmd_expand_darboux(cfg: RunConfig) -> int:
    order = cfg.order or 6
    text = dumps_family(expand_darboux(order))
    if cfg.output:
        Path(cfg.output).write_text(text)
        print(f"wrote Darboux expansion through degree {order} to {cfg.output}")
    else:
        sys.stdout.write(text)
    return OK


def _quadratic_audit() -> dict:
    full = cl.symbolic_ansatz()
    eqs = cl.quadratic_equations(full)
    l2 = cl.alpha_lambda_conditions(full)
    branch1 = cl.quadratic_equations(cl.symbolic_ansatz(branch="I"))
    l3 = cl.branch_I_conditions(cl.symbolic_ansatz(branch="I"))
    b1_nobeta_ans = cl.symbolic_ansatz(branch="I", zero=("beta",))
    b1_nobeta = cl.quadratic_equations(b1_nobeta_ans)
    l3_mu = cl.branch_I_conditions(b1_nobeta_ans)["mu_vanish"]
    b2_ans = cl.symbolic_ansatz(branch="II")
    b2 = cl.quadratic_equations(b2_ans)
    l4 = cl.branch_II_conditions(b2_ans)
    b2_nobeta_ans = cl.symbolic_ansatz(branch="II", zero=("beta",))
    l4_mu = cl.branch_II_conditions(b2_nobeta_ans)["mu_vanish"]
    b2_solved = cl.quadratic_equations(cl.symbolic_ansatz(branch="II", zero=("beta", "mu")))
    darboux_point = cl.quadratic_equations(
        cl.numeric_ansatz(4, {key: {("alpha",): 1} for key in cl.admissible_pairs(4)}))

    def found(eqset, conds):
        return sum(1 for _, p, _ in conds if eqset.contains(p))

    return {
        "equations": len(eqs),
        "distinct_equations": len(eqs.distinct()),
        "alpha_lambda_found": found(eqs, l2),
        "alpha_lambda_instances": len(l2),
        "branch_I": {
            "beta_equal_found": found(branch1, l3["beta_equal"]),
            "beta_opposite_found": found(branch1, l3["beta_opposite"]),
            "beta_relations_force_zero": cl.beta_relations_force_zero(),
            "mu_vanish_found_after_beta_zero": found(b1_nobeta, l3_mu),
            "instances": 24,
        },
        "branch_II": {
            "beta_vanish_found": found(b2, l4["beta_vanish"]),
            "mu_vanish_found_after_beta_zero": found(
                cl.quadratic_equations(b2_nobeta_ans), l4_mu),
            "remaining_equations_for_lambda_x_ij_squared": len(b2_solved),
            "instances": 24,
        },
        "darboux_point_violations": len(darboux_point),
    }


def _classify_family(fam: MapFamily, cfg: RunConfig) -> tuple[dict, list[str], int]:
    branch = cl.detect_branch(fam)
    doc: dict = {"branch": branch, "order": fam.order}
    summary = [f"input family: order {fam.order}, leading-term branch {branch}"]
    if branch == "mixed":
        doc["unsupported"] = "leading terms fit neither branch I nor branch II uniformly"
        summary.append("unsupported: mixed leading terms (neither branch I nor II)")
        return doc, summary, USAGE
    if branch in ("II", "trivial"):
        verdict = cl.check_branch_II(fam)
        doc["branch_II"] = verdict.to_json()
        if verdict.violation:
            m, face, k, mono = verdict.violation
            summary.append(f"univariate structure violated at order {m}, component {face}/{k} "
                           f"({cl.Polynomial.monomial(mono.exponents).format(var_name)})")
        else:
            summary.append("every A^(m) depends on x_ij alone")
            summary.append(f"commuting check: {'pass' if verdict.commuting else 'FAIL'}"
                           + (f" (first at degree {verdict.first_noncommuting[0]})"
                              if verdict.first_noncommuting else ""))
        summary.append(f"4D consistent through degree {verdict.consistent_up_to} of {fam.order}")
        if verdict.violation and verdict.violation_residual_nonzero is None:
            summary.append("the violating term sits at the top order; its obstruction appears one degree higher")
        ok = verdict.consistent and verdict.univariate and verdict.commuting is not False
        return doc, summary, OK if ok else FAIL
    alphas = {key: row[("alpha",)].coefficient(cl.Monomial()) for key, row in cl.ansatz_from_family(fam).coeffs.items()}
    doc["alpha_relations_hold"] = cl.check_branch_I(alphas)
    summary.append(f"alpha relations: {'hold' if doc['alpha_relations_hold'] else 'VIOLATED'}")
    if any(a != 1 for a in alphas.values()):
        g = cl.unit_alpha_gauge(fam)
        if g is None:
            doc["scaling"] = None
            summary.append("no rational scaling brings alpha to 1; stopping")
            return doc, summary, FAIL
        fam = conjugate(fam, g)
        doc["scaling"] = g.to_json()["scalings"]
        summary.append("scaled leading terms to x_ik x_jk")
    residual = second_stage_residual(fam, fam.order)
    doc["consistent_up_to"] = residual.consistent_up_to
    try:
        nf, gauge = normal_form(fam)
    except cl.BranchMismatch as exc:
        doc["normal_form"] = None
        summary.append(f"normal form unavailable: {exc}")
        return doc, summary, FAIL
    darboux = expand_darboux(fam.order)
    match = nf == darboux
    doc["normal_form_gauge"] = gauge.to_json()
    doc["normal_form_equals_darboux"] = match
    if not match:
        diffs = [{"face": [f.i, f.j], "dir": k, "degree": d}
                 for (f, k) in nf.keys() for d in range(2, fam.order + 1)
                 if nf.A(f, k, d) != darboux.A(f, k, d)]
        doc["mismatches"] = diffs[:20]
    summary.append(f"4D consistent through degree {residual.consistent_up_to} of {fam.order}")
    summary.append(f"gauge normal form {'EQUALS' if match else 'DIFFERS FROM'} the Darboux expansion")
    if not gauge.is_identity():
        summary.append("normalizing gauge: " + json.dumps(gauge.to_json()))
    return doc, summary, OK if match and residual_is_zero(residual) else FAIL


def cmd_classify(cfg: RunConfig) -> int:
    order = cfg.order or 6
    if cfg.input:
        fam = _at_order(load_map_family(cfg.input), cfg.order)
        if fam.symmetry != SYMMETRIC:
            raise UsageError("classification applies to symmetric families only")
        doc, summary, code = _classify_family(fam, cfg)
        _emit(cfg, doc, summary)
        return code
    audit = _quadratic_audit()
    dims = cl.kernel_dimensions(order)
    rebuilt = cl.reconstruct_darboux(order)
    match = rebuilt == expand_darboux(order)
    consistent = residual_is_zero(second_stage_residual(rebuilt, order))
    doc = {"quadratic_audit": audit,
           "kernel_dimensions": {str(t): d for t, d in dims.items()},
           "reconstruction_order": order,
           "reconstruction_equals_darboux": match,
           "reconstruction_consistent": consistent}
    b1, b2 = audit["branch_I"], audit["branch_II"]
    summary = [
        f"degree-3 coefficient equations: {audit['equations']} ({audit['distinct_equations']} distinct)",
        f"alpha_ij;l * lambda_ij;k = 0 found for {audit['alpha_lambda_found']}/{audit['alpha_lambda_instances']} index choices",
        f"branch I: beta_ij;k^(i) = beta_il;k^(i): {b1['beta_equal_found']}/24, "
        f"beta_il;k^(l) = -beta_jl;k^(l): {b1['beta_opposite_found']}/24, "
        f"force beta = 0: {b1['beta_relations_force_zero']}, mu annihilation: {b1['mu_vanish_found_after_beta_zero']}/24",
        f"branch II: lambda*beta: {b2['beta_vanish_found']}/24, lambda*mu: {b2['mu_vanish_found_after_beta_zero']}/24, "
        f"lambda x_ij^2 leaves {b2['remaining_equations_for_lambda_x_ij_squared']} conditions",
        f"Darboux point violates {audit['darboux_point_violations']} equations",
    ]
    summary += _table(["target order", "kernel dim"], [[t, d] for t, d in dims.items()])
    summary.append(f"order-by-order reconstruction through degree {order} "
                   f"{'equals' if match else 'DIFFERS FROM'} the Darboux expansion")
    _emit(cfg, doc, summary)
    return OK if match and consistent and all(d == 6 for d in dims.values()) else FAIL


def _parse_params(text: str) -> KernelParameters:
    b = {}
    for part in filter(None, (p.strip() for p in text.split(","))):
        try:
            label, val = part.split("=")
            b[parse_face_label(label)] = parse_rational(val)
        except ValueError as exc:
            raise UsageError(f"bad parameter {part!r}; expected e.g. 12=1/2") from exc
    return KernelParameters(b)


def cmd_kernel(cfg: RunConfig, params: str | None = None, degree: int | None = None) -> int:
    order = cfg.order or 6
    if params is not None:
        m = degree if degree is not None else order - 1
        if m < 2 or m + 1 > order:
            raise UsageError("--degree m needs 2 <= m and m + 1 <= --order")
        fam = expand_darboux(order).with_slice(m + 1, kernel_element(_parse_params(params), m), add=True)
        text = dumps_family(fam)
        if cfg.output:
            Path(cfg.output).write_text(text)
            print(f"wrote Darboux + kernel element (m={m}) to {cfg.output}")
        else:
            sys.stdout.write(text)
        return OK
    base = cl.darboux_leading()
    results = []
    rows = []
    all_ok = True
    for target in range(3, order + 1):
        res = cl.solve_order(base.with_order(target), target, homogeneous=True)
        vecs = cl.kernel_element_vectors(res)
        member = all(not any(res.matrix.apply(v)) for v in vecs)
        span = RationalMatrix.from_dense(vecs + [res.vector(k) for k in res.kernel]).rank()
        ok = res.kernel_dim == 6 and member and span == 6
        all_ok &= ok
        entry = res.to_json(cfg.dump_matrix)
        entry["closed_form_in_kernel"] = member
        entry["span_rank"] = span
        results.append(entry)
        rows.append([target, res.matrix.nrows, res.matrix.ncols, res.kernel_dim, member, span == 6])
    summary = _table(["target", "rows", "cols", "kernel dim", "b_ij family in kernel", "spans kernel"], rows)
    _emit(cfg, {"orders": results, "ok": all_ok}, summary)
    return OK if all_ok else FAIL


def cmd_gauge_apply(cfg: RunConfig, gauge_path: str | None) -> int:
    fam = _at_order(_load(cfg), cfg.order)
    if not gauge_path:
        raise UsageError("--gauge FILE is required")
    try:
        g = GaugeTransformation.from_json(json.loads(Path(gauge_path).read_text()))
    except (OSError, json.JSONDecodeError, ValueError, AttributeError, TypeError) as exc:
        raise ParseError(f"bad gauge file {gauge_path}: {exc}") from exc
    text = dumps_family(conjugate(fam, g))
    if cfg.output:
        Path(cfg.output).write_text(text)
        print(f"wrote conjugated family to {cfg.output}")
    else:
        sys.stdout.write(text)
    return OK


def random_state(rng: random.Random, kind: str, mode: str, n: int = 4) -> PointState:
    sym = MAPS[kind].symmetry
    faces = enumerate_faces(n)
    if mode == EXACT:
        vals = {f: Fraction(rng.randint(-9, 9), rng.randint(1, 9)) for f in faces}
    elif kind == "darboux":
        vals = {f: rng.uniform(-0.3, 0.3) for f in faces}
    else:
        vals = {f: rng.uniform(-1.0, 1.0) for f in faces}
    return PointState(vals, sym)


def cmd_numeric_check(cfg: RunConfig, map_name: str, state_kind: str = "random") -> int:
    if map_name not in MAPS:
        raise UsageError(f"unknown map {map_name!r}")
    cmap = MAPS[map_name]
    mode = cfg.mode or (EXACT if cmap.kind == "star_triangle" else FLOAT)
    if mode not in (EXACT, FLOAT):
        raise UsageError(f"unknown mode {mode!r}")
    rng = random.Random(cfg.seed)
    margin = 1e-3 if mode == FLOAT else 0.0
    resampled = 0
    maxima = []
    exact_zero = 0
    attempts = 0
    while len(maxima) < cfg.trials:
        attempts += 1
        if attempts > 200 * cfg.trials:
            break
        state = zero_state(4, cmap.symmetry) if state_kind == "zero" else random_state(rng, map_name, mode)
        if mode == FLOAT:
            state = PointState({f: float(v) for f, v in state.values.items()}, state.symmetry)
        try:
            res = numeric_residual(cmap, state, mode, margin=margin)
        except DomainError:
            resampled += 1
            continue
        worst = max(res.values())
        maxima.append(worst)
        exact_zero += int(worst == 0)
    done = len(maxima)
    mx = max(maxima, default=float("nan"))
    mean = (sum(maxima) / done) if done else float("nan")
    if mode == EXACT:
        ok = done == cfg.trials and exact_zero == done
        doc = {"map": cmap.kind, "mode": mode, "seed": cfg.seed, "trials": cfg.trials, "completed": done,
               "resampled": resampled, "exact_zero": exact_zero, "ok": ok,
               "max_residual": str(mx) if done else None}
        summary = [f"{cmap.kind} exact: {exact_zero}/{cfg.trials} states with all six residuals exactly zero "
                   f"({resampled} resampled)"]
    else:
        ok = done == cfg.trials and mx < cfg.tolerance
        doc = {"map": cmap.kind, "mode": mode, "seed": cfg.seed, "trials": cfg.trials, "completed": done,
               "resampled": resampled, "max_residual": float(mx), "mean_residual": float(mean),
               "tolerance": cfg.tolerance, "ok": ok}
        summary = [f"{cmap.kind} float: {done} states, max residual {float(mx):.3e}, mean {float(mean):.3e}, "
                   f"tolerance {cfg.tolerance:g} ({resampled} resampled): {'PASS' if ok else 'FAIL'}"]
    if done < cfg.trials:
        summary.append(f"only {done} of {cfg.trials} states fell inside the map's domain")
        if cmap.kind == "darboux" and mode == EXACT:
            summary.append("exact Darboux needs rational square roots at both shift levels; use --mode float")
    _emit(cfg, doc, summary)
    return OK if ok else FAIL


# -- argument parsing ------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--order", type=int, default=None, help="truncation order M (default 6; verify: the file's order)")
    common.add_argument("--output", "-o", help="write the report / family here")
    common.add_argument("--json", action="store_true", help="print the JSON report instead of a table")
    common.add_argument("-v", "--verbose", action="count", default=0)

    with_input = argparse.ArgumentParser(add_help=False)
    with_input.add_argument("path", nargs="?", help="map-family JSON file")
    with_input.add_argument("--input", "-i", help="map-family JSON file")

    p = argparse.ArgumentParser(prog="cubecons", description="Exact 4D-consistency checks for 3D lattice maps.")
    sub = p.add_subparsers(dest="command", required=True)
    sub.add_parser("verify", parents=[common, with_input], help="residuals of the six consistency equations")
    sub.add_parser("expand-darboux", parents=[common], help="write the Darboux series as a map-family file")
    sub.add_parser("classify", parents=[common, with_input], help="leading-term audit, kernels, normal form")
    k = sub.add_parser("kernel", parents=[common], help="per-order kernel of the linearized system")
    k.add_argument("--dump-matrix", action="store_true")
    k.add_argument("--params", help="b_ij values, e.g. 12=1,34=-1/2: write Darboux + kernel element instead")
    k.add_argument("--degree", type=int, help="m for --params (increment has degree m+1; default order-1)")
    g = sub.add_parser("gauge-apply", parents=[common, with_input], help="conjugate a family by a gauge")
    g.add_argument("--gauge", help='JSON {"scalings": {"12": "c"}, "point": {"12": {"2": "b"}}}')
    nc = sub.add_parser("numeric-check", parents=[common], help="closed-form maps on random states")
    nc.add_argument("--map", default="star-triangle", choices=sorted(MAPS))
    nc.add_argument("--mode", choices=[EXACT, FLOAT])
    nc.add_argument("--trials", type=int, default=100)
    nc.add_argument("--seed", type=int, default=0)
    nc.add_argument("--tolerance", type=float, default=1e-10)
    nc.add_argument("--state", choices=["random", "zero"], default="random")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    cfg = RunConfig(
        command=args.command,
        order=args.order,
        input=getattr(args, "input", None) or getattr(args, "path", None),
        output=args.output,
        seed=getattr(args, "seed", 0),
        trials=getattr(args, "trials", 1),
        tolerance=getattr(args, "tolerance", 1e-10),
        mode=getattr(args, "mode", None),
        dump_matrix=getattr(args, "dump_matrix", False),
        json=args.json,
        verbose=args.verbose,
    )
    try:
        cfg.validate()
        if cfg.command == "verify":
            return cmd_verify(cfg)
        if cfg.command == "expand-darboux":
            return cmd_expand_darboux(cfg)
        if cfg.command == "classify":
            return cmd_classify(cfg)
        if cfg.command == "kernel":
            return cmd_kernel(cfg, args.params, args.degree)
        if cfg.command == "gauge-apply":
            return cmd_gauge_apply(cfg, args.gauge)
        if cfg.command == "numeric-check":
            return cmd_numeric_check(cfg, args.map, args.state)
    except (UsageError, ParseError, ValidationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    except Inconsistent as exc:
        print(f"inconsistent: {exc}", file=sys.stderr)
        return FAIL
    parser.error(f"unknown command {cfg.command}")
    return USAGE


if __name__ == "__main__":
    sys.exit(main())
