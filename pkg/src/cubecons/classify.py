"""Leading-term analysis, per-order linear solve, and branch structure checks."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Mapping

from .consistency import equation_keys, residual_is_zero, second_stage_residual
from .exactpoly import (
    Inconsistent,
    Monomial,
    Polynomial,
    RationalMatrix,
    format_rational,
    monomials_of_degree,
    nullspace,
    solve_particular,
    split_by,
)
from .gauge import BranchMismatch, GaugeTransformation, KernelParameters, kernel_element, slice_monomial
from .lattice import (
    SYMMETRIC,
    Face,
    MapFamily,
    SeriesComponent,
    admissible_pairs,
    enumerate_faces,
    family_from_roles,
    namer_for,
    roles,
    var_name,
)
from .maps import UnivariateSeries, univariate_compose

Component = tuple[Face, int]


# -- quadratic ansatz ------------------------------------------------------

KINDS = ("alpha", "beta", "lambda", "mu")


def _kind_keys(face: Face) -> list[tuple]:
    return [("alpha",), ("beta", face.i), ("beta", face.j), ("lambda",), ("mu", face.i), ("mu", face.j)]


@dataclass
class QuadraticAnsatz:
    """Six coefficients per component of A^(2); each a Fraction or a symbolic token.

    Tokens are extra polynomial variables numbered after the face variables.
    """

    n: int
    coeffs: dict[Component, dict[tuple, Polynomial]]
    token_names: dict[int, str] = field(default_factory=dict)

    def coefficient(self, kind: str, face: Face, k: int, index: int | None = None) -> Polynomial:
        key = (kind,) if index is None else (kind, index)
        return self.coeffs[(face, k)][key]

    def token(self, kind: str, face: Face, k: int, index: int | None = None) -> Polynomial:
        return self.coefficient(kind, face, k, index)

    def polynomial(self, face: Face, k: int) -> Polynomial:
        vij, vik, vjk = roles(face, k)
        c = self.coeffs[(face, k)]
        var = Polynomial.var
        sq = lambda v: Polynomial.var(v, 1, 2)
        return (
            c[("alpha",)] * var(vik) * var(vjk)
            + c[("beta", face.i)] * var(vij) * var(vik)
            + c[("beta", face.j)] * var(vij) * var(vjk)
            + c[("lambda",)] * sq(vij)
            + c[("mu", face.i)] * sq(vik)
            + c[("mu", face.j)] * sq(vjk)
        )

    def polynomials(self) -> dict[Component, Polynomial]:
        return {key: self.polynomial(*key) for key in self.coeffs}

    def face_vars(self) -> list[int]:
        return [f.var for f in enumerate_faces(self.n)]

    def namer(self) -> Callable[[int], str]:
        return namer_for(self.token_names)


def _token_name(kind: tuple, face: Face, k: int) -> str:
    if len(kind) == 1:
        return f"{kind[0]}_{face.label}_{k}"
    return f"{kind[0]}{kind[1]}_{face.label}_{k}"


def symbolic_ansatz(n: int = 4, branch: str | None = None, zero: Iterable[str] = ()) -> QuadraticAnsatz:
    """Symbolic ansatz; ``branch`` 'I' sets lambda = 0, 'II' sets alpha = 0.

    ``zero`` names further coefficient kinds to set to zero (e.g. ``("beta",)``
    once the beta relations have been used).
    """
    zero = set(zero)
    if branch == "I":
        zero.add("lambda")
    elif branch == "II":
        zero.add("alpha")
    elif branch is not None:
        raise ValueError(f"unknown branch {branch!r}")
    offset = n * (n - 1) // 2
    coeffs: dict[Component, dict[tuple, Polynomial]] = {}
    names: dict[int, str] = {}
    nxt = offset
    for face, k in admissible_pairs(n):
        row = {}
        for kind in _kind_keys(face):
            if kind[0] in zero:
                row[kind] = Polynomial.zero()
                continue
            names[nxt] = _token_name(kind, face, k)
            row[kind] = Polynomial.var(nxt)
            nxt += 1
        coeffs[(face, k)] = row
    return QuadraticAnsatz(n, coeffs, names)


def numeric_ansatz(n: int, values: Mapping[Component, Mapping[tuple, object]]) -> QuadraticAnsatz:
    """Ansatz with rational coefficients; missing entries are zero."""
    coeffs = {}
    for face, k in admissible_pairs(n):
        given = values.get((face, k), {})
        coeffs[(face, k)] = {kind: Polynomial.const(given.get(kind, 0)) for kind in _kind_keys(face)}
    return QuadraticAnsatz(n, coeffs)


def ansatz_from_family(fam: MapFamily) -> QuadraticAnsatz:
    vals = {}
    for face, k in fam.components:
        vij, vik, vjk = roles(face, k)
        a2 = fam.A(face, k, 2)
        co = lambda e: a2.coefficient(Monomial(e))
        vals[(face, k)] = {
            ("alpha",): co({vik: 1, vjk: 1}),
            ("beta", face.i): co({vij: 1, vik: 1}),
            ("beta", face.j): co({vij: 1, vjk: 1}),
            ("lambda",): co({vij: 2}),
            ("mu", face.i): co({vik: 2}),
            ("mu", face.j): co({vjk: 2}),
        }
    return numeric_ansatz(fam.n, vals)


def degree3_residual(a2: Mapping[Component, Polynomial], n: int = 4) -> dict[tuple[Face, int, int], Polynomial]:
    """Left minus right side of the first-order (degree 3) commutation condition on A^(2)."""

    def side(face: Face, k: int, l: int) -> Polynomial:
        src = a2[(face, k)]
        vij, vik, vjk = roles(face, k)
        total = Polynomial.zero()
        for v, f in ((vij, face), (vik, Face(face.i, k)), (vjk, Face(face.j, k))):
            d = src.diff(v)
            if d:
                total = total + d * a2[(f, l)]
        return total

    return {(face, k, l): side(face, k, l) - side(face, l, k) for face, k, l in equation_keys(n)}


def _monic(p: Polynomial) -> Polynomial:
    terms = p.terms()
    if not terms:
        return p
    return p.scale(1 / terms[-1][1])


@dataclass(frozen=True)
class CoefficientEquation:
    face: Face
    k: int
    l: int
    monomial: Monomial
    poly: Polynomial  # normalized: leading coefficient 1
    raw: Polynomial


@dataclass
class CoefficientEquationSet:
    ansatz: QuadraticAnsatz
    equations: list[CoefficientEquation]

    def __len__(self) -> int:
        return len(self.equations)

    def __iter__(self):
        return iter(self.equations)

    def find(self, poly: Polynomial) -> list[CoefficientEquation]:
        target = _monic(poly)
        return [e for e in self.equations if e.poly == target]

    def contains(self, poly: Polynomial) -> bool:
        return bool(self.find(poly))

    def distinct(self) -> set[Polynomial]:
        return {e.poly for e in self.equations}

    def to_json(self) -> list[dict]:
        name = self.ansatz.namer()
        out = []
        for e in self.equations:
            out.append({
                "face": [e.face.i, e.face.j], "pair": [e.k, e.l],
                "monomial": Polynomial.monomial(e.monomial.exponents).format(name),
                "equation": e.poly.format(name) + " = 0",
            })
        return out


def quadratic_equations(ansatz: QuadraticAnsatz) -> CoefficientEquationSet:
    """Coefficients of every x-monomial in the degree-3 condition, as equations in the ansatz tokens."""
    res = degree3_residual(ansatz.polynomials(), ansatz.n)
    xs = ansatz.face_vars()
    eqs = []
    for (face, k, l), p in res.items():
        for mono, coeff in split_by(p, xs).items():
            if coeff:
                eqs.append(CoefficientEquation(face, k, l, mono, _monic(coeff), coeff))
    return CoefficientEquationSet(ansatz, eqs)


def _perms(n: int = 4):
    return itertools.permutations(range(1, n + 1), 4)


def alpha_lambda_conditions(ans: QuadraticAnsatz) -> list[tuple[tuple[int, ...], Polynomial, Monomial]]:
    """alpha_{ij;l} lambda_{ij;k} for every ordering (i, j, k, l), with its source monomial."""
    out = []
    for i, j, k, l in _perms(ans.n):
        f = Face(i, j)
        p = ans.token("alpha", f, l) * ans.token("lambda", f, k)
        out.append(((i, j, k, l), p, Monomial({f.var: 1, Face(i, l).var: 1, Face(j, l).var: 1})))
    return out


def branch_I_conditions(ans: QuadraticAnsatz) -> dict[str, list[tuple[tuple[int, ...], Polynomial, Monomial]]]:
    """Branch-I conditions: the two beta relations and the mu annihilation."""
    beta1, beta2, mu = [], [], []
    for i, j, k, l in _perms(ans.n):
        fij, fil, fjl, fik = Face(i, j), Face(i, l), Face(j, l), Face(i, k)
        a_l = ans.token("alpha", fij, l)
        beta1.append(((i, j, k, l),
                      a_l * (ans.token("beta", fij, k, i) - ans.token("beta", fil, k, i)),
                      Monomial({fil.var: 1, fjl.var: 1, fik.var: 1})))
        beta2.append(((i, j, k, l),
                      a_l * (ans.token("beta", fil, k, l) + ans.token("beta", fjl, k, l)),
                      Monomial({fil.var: 1, fjl.var: 1, Face(k, l).var: 1})))
        mu.append(((i, j, k, l),
                   ans.token("mu", fik, l, i) * ans.token("alpha", fij, k),
                   Monomial({fil.var: 2, Face(j, k).var: 1})))
    return {"beta_equal": beta1, "beta_opposite": beta2, "mu_vanish": mu}


def beta_relations_force_zero(n: int = 4) -> bool:
    """The linear relations beta^(i)_{ij;k} = beta^(i)_{il;k} and beta^(l)_{il;k} = -beta^(l)_{jl;k}
    (all index choices) admit only beta = 0."""
    index: dict[tuple, int] = {}
    for face, k in admissible_pairs(n):
        for a in face:
            index[(face, k, a)] = len(index)
    rows = []
    for i, j, k, l in _perms(n):
        rows.append({index[(Face(i, j), k, i)]: 1, index[(Face(i, l), k, i)]: -1})
        rows.append({index[(Face(i, l), k, l)]: 1, index[(Face(j, l), k, l)]: 1})
    return RationalMatrix(len(rows), len(index), rows).rank() == len(index)


def branch_II_conditions(ans: QuadraticAnsatz) -> dict[str, list[tuple[tuple[int, ...], Polynomial, Monomial]]]:
    """Branch-II conditions: lambda_{ij;l} beta^(i)_{ij;k} and lambda_{ij;k} mu^(i)_{ij;l}."""
    beta, mu = [], []
    for i, j, k, l in _perms(ans.n):
        fij = Face(i, j)
        beta.append(((i, j, k, l), ans.token("lambda", fij, l) * ans.token("beta", fij, k, i),
                     Monomial({fij.var: 2, Face(i, k).var: 1})))
        mu.append(((i, j, k, l), ans.token("lambda", fij, k) * ans.token("mu", fij, l, i),
                   Monomial({Face(i, l).var: 2, fij.var: 1})))
    return {"beta_vanish": beta, "mu_vanish": mu}


def alpha_relations(n: int = 4) -> list[tuple[Component, Component, Component, Component]]:
    """Index quadruples of alpha_{ik;l} alpha_{ij;k} = alpha_{jl;k} alpha_{ij;l}."""
    out = []
    for i, j, k, l in _perms(n):
        out.append(((Face(i, k), l), (Face(i, j), k), (Face(j, l), k), (Face(i, j), l)))
    return out


def check_branch_I(alphas: Mapping[Component, object]) -> bool:
    for a, b, c, d in alpha_relations():
        if Fraction(alphas[a]) * Fraction(alphas[b]) != Fraction(alphas[c]) * Fraction(alphas[d]):
            return False
    return True


def _rational_sqrt(q: Fraction) -> Fraction | None:
    if q < 0:
        return None
    rn, rd = math.isqrt(q.numerator), math.isqrt(q.denominator)
    if rn * rn != q.numerator or rd * rd != q.denominator:
        return None
    return Fraction(rn, rd)


def alpha_potential(alphas: Mapping[Component, object], n: int = 4) -> dict[Face, Fraction] | None:
    """Rational c with alpha_{ij;k} = c_ik c_jk / c_ij, or None if none exists over Q."""
    alphas = {key: Fraction(v) for key, v in alphas.items()}
    faces = enumerate_faces(n)
    mags = {}
    for f in faces:
        i = min(d for d in range(1, n + 1) if d not in f)
        # alpha_{ik;l} alpha_{il;k} = c_kl^2 with {k, l} = f
        c = _rational_sqrt(alphas[(Face(i, f.i), f.j)] * alphas[(Face(i, f.j), f.i)])
        if c is None or not c:
            return None
        mags[f] = c
    for signs in itertools.product((1, -1), repeat=len(faces)):
        c = {f: s * mags[f] for f, s in zip(faces, signs)}
        if all(alphas[(f, k)] == c[Face(f.i, k)] * c[Face(f.j, k)] / c[f] for f, k in alphas):
            return c
    return None


# -- case II ---------------------------------------------------------------


def commuting_failures(f: Mapping[Component, UnivariateSeries], order: int) -> list[tuple[int, Face, int, int]]:
    """(first differing degree, face, k, l) for every pair whose compositions disagree."""
    out = []
    faces = sorted({face for face, _ in f})
    for face in faces:
        dirs = sorted(k for fc, k in f if fc == face)
        for k, l in itertools.combinations(dirs, 2):
            a = univariate_compose(f[(face, k)], f[(face, l)], order)
            b = univariate_compose(f[(face, l)], f[(face, k)], order)
            diff = [d for d in range(1, order + 1) if a[d] != b[d]]
            if diff:
                out.append((diff[0], face, k, l))
    return out


def check_commuting(f: Mapping[Component, UnivariateSeries], order: int) -> bool:
    return not commuting_failures(f, order)


@dataclass
class BranchIIVerdict:
    branch: str
    univariate: bool
    violation: tuple[int, Face, int, Monomial] | None = None
    violation_residual_nonzero: bool | None = None
    commuting: bool | None = None
    first_noncommuting: tuple[int, Face, int, int] | None = None
    consistent: bool = False
    consistent_up_to: int = 0
    order: int = 0

    def to_json(self) -> dict:
        v = self.violation
        nc = self.first_noncommuting
        return {
            "branch": self.branch,
            "order": self.order,
            "univariate": self.univariate,
            "violation": None if v is None else {
                "order": v[0], "face": [v[1].i, v[1].j], "dir": v[2],
                "monomial": Polynomial.monomial(v[3].exponents).format(var_name)},
            "violation_residual_nonzero": self.violation_residual_nonzero,
            "commuting": self.commuting,
            "first_noncommuting": None if nc is None else {
                "degree": nc[0], "face": [nc[1].i, nc[1].j], "pair": [nc[2], nc[3]]},
            "consistent": self.consistent,
            "consistent_up_to": self.consistent_up_to,
        }


def univariate_series_of(fam: MapFamily) -> dict[Component, UnivariateSeries]:
    """f_{ij;k}(x) read from a family whose components depend on x_ij only."""
    out = {}
    for (face, k), c in fam.components.items():
        coeffs = {1: Fraction(1)}
        for m, p in c.terms_by_degree.items():
            coeffs[m] = p.coefficient(Monomial({face.var: m}))
        out[(face, k)] = UnivariateSeries(coeffs, fam.order)
    return out


def family_from_univariate(n: int, order: int, f: Mapping[Component, UnivariateSeries]) -> MapFamily:
    comps = {}
    for (face, k), s in f.items():
        comps[(face, k)] = SeriesComponent(
            face, k, {d: Polynomial.var(face.var, c, d) for d, c in s.coeffs.items() if 2 <= d <= order})
    return MapFamily(n, order, comps)


def check_branch_II(fam: MapFamily) -> BranchIIVerdict:
    """Check that every A^(m) depends on x_ij alone, then reduce consistency to commutation."""
    branch = detect_branch(fam)
    if branch not in ("II", "trivial"):
        raise BranchMismatch(f"expected leading terms lambda x_ij^2 (branch II), found branch {branch}")
    report = second_stage_residual(fam, fam.order)
    verdict = BranchIIVerdict(branch, True, order=fam.order, consistent=residual_is_zero(report),
                              consistent_up_to=report.consistent_up_to)
    for m in range(3, fam.order + 1):
        for face, k in fam.components:
            for mono, _ in fam.A(face, k, m).terms():
                if set(mono.exponents) != {face.var}:
                    verdict.univariate = False
                    verdict.violation = (m, face, k, mono)
                    break
            if verdict.violation:
                break
        if verdict.violation:
            break
    if verdict.violation is not None:
        m = verdict.violation[0]
        if m + 1 <= fam.order:
            verdict.violation_residual_nonzero = any(
                report.residuals[key][m + 1] for key in report.residuals)
        return verdict
    f = univariate_series_of(fam)
    fails = commuting_failures(f, fam.order)
    verdict.commuting = not fails
    verdict.first_noncommuting = min(fails, key=lambda t: (t[0], t[1], t[2], t[3])) if fails else None
    return verdict


def detect_branch(fam: MapFamily) -> str:
    """'I' (all alpha != 0, lambda = 0), 'II' (A^(2) = lambda x_ij^2, lambda != 0), 'trivial', or 'mixed'."""
    ans = ansatz_from_family(fam)
    vals = [{kind: p.coefficient(Monomial()) for kind, p in row.items()} for row in ans.coeffs.values()]
    if all(not any(v.values()) for v in vals):
        return "trivial"
    if all(v[("alpha",)] and not v[("lambda",)] for v in vals):
        return "I"
    if all(v[("lambda",)] and not any(c for kind, c in v.items() if kind != ("lambda",)) for v in vals):
        return "II"
    return "mixed"


# -- case I: per-order linear solve ---------------------------------------


def _delta_image(a2: Mapping[Component, Polynomial], delta: Mapping[Component, Polynomial],
                 face: Face, k: int, l: int) -> Polynomial:
    """Part of the degree-(target+1) residual linear in the degree-target unknowns delta."""

    def side(k: int, l: int) -> Polynomial:
        total = Polynomial.zero()
        vij, vik, vjk = roles(face, k)
        dk = delta.get((face, k))
        a2k = a2[(face, k)]
        for v, f in ((vij, face), (vik, Face(face.i, k)), (vjk, Face(face.j, k))):
            if dk is not None:
                dd = dk.diff(v)
                if dd:
                    total = total + dd * a2[(f, l)]
            dl = delta.get((f, l))
            if dl is not None:
                da = a2k.diff(v)
                if da:
                    total = total + da * dl
        return total

    return side(k, l) - side(l, k)


@dataclass
class OrderSolveResult:
    target: int
    columns: list[tuple[Component, Monomial]]
    row_labels: list[tuple[tuple[Face, int, int], Monomial]]
    matrix: RationalMatrix
    particular: dict[Component, Polynomial] | None
    kernel: list[dict[Component, Polynomial]]
    rhs: list[Fraction] = field(default_factory=list)

    @property
    def kernel_dim(self) -> int:
        return len(self.kernel)

    def vector(self, polys: Mapping[Component, Polynomial]) -> list[Fraction]:
        return [polys.get(comp, Polynomial.zero()).coefficient(mono) for comp, mono in self.columns]

    def to_json(self, dump_matrix: bool = False) -> dict:
        def fam_json(d):
            return [{"face": [f.i, f.j], "dir": k, "poly": d[(f, k)].format(var_name)}
                    for f, k in sorted(d) if d[(f, k)]]

        doc = {
            "target_order": self.target,
            "rows": self.matrix.nrows,
            "cols": self.matrix.ncols,
            "rank": self.matrix.ncols - self.kernel_dim,
            "kernel_dim": self.kernel_dim,
            "particular": None if self.particular is None else fam_json(self.particular),
            "kernel": [fam_json(v) for v in self.kernel],
        }
        if dump_matrix:
            doc["columns"] = [{"face": [f.i, f.j], "dir": k,
                               "monomial": Polynomial.monomial(m.exponents).format(var_name)}
                              for (f, k), m in self.columns]
            doc["matrix"] = [{str(c): format_rational(v) for c, v in sorted(r.items())} for r in self.matrix.rows]
            doc["rhs"] = [format_rational(v) for v in self.rhs]
        return doc


def linear_operator(fam: MapFamily, target: int):
    """Matrix of the degree-(target+1) residual as a linear map of the degree-target unknowns."""
    n = fam.n
    a2 = fam.slice(2)
    columns = [((face, k), mono) for face, k in admissible_pairs(n)
               for mono in monomials_of_degree(roles(face, k), target)]
    eqs = equation_keys(n)
    images: list[list[tuple[int, Polynomial]]] = []
    for comp, mono in columns:
        delta = {comp: Polynomial.monomial(mono.exponents)}
        face_c, k_c = comp
        col = []
        for e, (face, k, l) in enumerate(eqs):
            # a unit in component (f, d) only reaches equations where d is one of the pair
            # and the equation face is f or adjacent to it
            if k_c not in (k, l):
                continue
            img = _delta_image(a2, delta, face, k, l)
            if img:
                col.append((e, img))
        images.append(col)
    row_index: dict[tuple[int, int], int] = {}
    for col in images:
        for e, img in col:
            for mono, _ in img.terms():
                row_index.setdefault((e, mono.key), -1)
    labels = sorted(row_index, key=lambda t: (t[0], Monomial.from_key(t[1]).sort_key()))
    for r, key in enumerate(labels):
        row_index[key] = r
    rows: list[dict[int, Fraction]] = [dict() for _ in labels]
    for c, col in enumerate(images):
        for e, img in col:
            for key, v in img.items():
                rows[row_index[(e, key)]][c] = v
    row_labels = [(eqs[e], Monomial.from_key(key)) for e, key in labels]
    return columns, row_labels, rows


def solve_order(fam: MapFamily, target: int, homogeneous: bool = False) -> OrderSolveResult:
    """Solve the linear system for A^(target) given the components of degree < target.

    The inhomogeneous term is the degree-(target+1) residual with A^(target) = 0.
    """
    if target < 3:
        raise ValueError("target order must be >= 3")
    if fam.symmetry != SYMMETRIC:
        raise ValueError("solve_order needs a symmetric family")
    base = fam.truncated(target - 1).with_order(target + 1)
    columns, row_labels, rows = linear_operator(base, target)
    eqs = equation_keys(fam.n)
    rhs_terms: dict[tuple[int, int], Fraction] = {}
    if not homogeneous:
        report = second_stage_residual(base, target + 1)
        lower = [(d, key) for d, key in report.nonzero() if d <= target]
        if lower:
            d, key = lower[0]
            raise Inconsistent(f"input family is not consistent through degree {target}: "
                               f"residual of {key[0]} pair ({key[1]},{key[2]}) nonzero at degree {d}")
        for e, key in enumerate(eqs):
            for mono, c in report.residuals[key][target + 1].items():
                rhs_terms[(e, mono)] = -c
    index = {(eqs.index(eq), mono.key): r for r, (eq, mono) in enumerate(row_labels)}
    extra = sorted((k for k in rhs_terms if k not in index), key=lambda t: (t[0], Monomial.from_key(t[1]).sort_key()))
    for key in extra:
        index[key] = len(row_labels)
        row_labels.append((eqs[key[0]], Monomial.from_key(key[1])))
        rows.append({})
    rhs = [Fraction(0)] * len(row_labels)
    for key, c in rhs_terms.items():
        rhs[index[key]] = c
    matrix = RationalMatrix(len(rows), len(columns), rows)

    def to_polys(vec) -> dict[Component, Polynomial]:
        acc: dict[Component, Polynomial] = {key: Polynomial.zero() for key in admissible_pairs(fam.n)}
        for (comp, mono), v in zip(columns, vec):
            if v:
                acc[comp] = acc[comp] + Polynomial.monomial(mono.exponents, v)
        return acc

    try:
        x = solve_particular(matrix, rhs)
    except Inconsistent as exc:
        where = [f"{row_labels[r][0][0]} pair ({row_labels[r][0][1]},{row_labels[r][0][2]}) "
                 f"at {Polynomial.monomial(row_labels[r][1].exponents).format(var_name)}" for r in exc.rows[:5]]
        raise Inconsistent(f"no degree-{target} extension exists; contradictory rows: {'; '.join(where)}",
                           exc.rows) from None
    kernel = [to_polys(v) for v in nullspace(matrix)]
    return OrderSolveResult(target, columns, row_labels, matrix, to_polys(x), kernel, rhs)


def kernel_dimensions(order: int, n: int = 4) -> dict[int, int]:
    """Kernel dimension of the homogeneous system at each target 3..order, Darboux leading terms."""
    fam = darboux_leading(n)
    return {t: solve_order(fam.with_order(t), t, homogeneous=True).kernel_dim for t in range(3, order + 1)}


def darboux_leading(n: int = 4, order: int = 2) -> MapFamily:
    return family_from_roles(n, order, {2: [(1, (0, 1, 1))]})


def gauge_fix(result: OrderSolveResult, n: int = 4) -> dict[Component, Polynomial]:
    """The solution in the gauge slice: particular + kernel combination with zero slice coefficients."""
    m = result.target - 1
    comps = admissible_pairs(n)
    mons = [slice_monomial(f, k, m) for f, k in comps]
    rows = []
    rhs = []
    for (f, k), mono in zip(comps, mons):
        rows.append({r: v[(f, k)].coefficient(mono) for r, v in enumerate(result.kernel)})
        rhs.append(-result.particular[(f, k)].coefficient(mono))
    mat = RationalMatrix(len(rows), result.kernel_dim, rows)
    if mat.rank() != result.kernel_dim:
        raise ArithmeticError("gauge slice does not fix the kernel freedom uniquely")
    t = solve_particular(mat, rhs)
    out = dict(result.particular)
    for coef, vec in zip(t, result.kernel):
        if coef:
            for key in out:
                out[key] = out[key] + vec[key].scale(coef)
    return out


def reconstruct_darboux(order: int, n: int = 4) -> MapFamily:
    """Solve order by order from A^(2) = x_ik x_jk, picking the gauge-slice solution each time."""
    if order < 2:
        raise ValueError("order must be >= 2")
    fam = darboux_leading(n)
    for target in range(3, order + 1):
        res = solve_order(fam.with_order(target), target)
        fam = fam.with_slice(target, gauge_fix(res, n))
    return fam


def kernel_element_vectors(result: OrderSolveResult, n: int = 4) -> list[list[Fraction]]:
    """The six unit-parameter kernel elements as coordinate vectors in the result's columns."""
    m = result.target - 1
    return [result.vector(kernel_element(KernelParameters.unit(f), m, n)) for f in enumerate_faces(n)]


def unit_alpha_gauge(fam: MapFamily) -> GaugeTransformation | None:
    """Scaling that brings branch-I leading terms alpha x_ik x_jk to x_ik x_jk, if rational."""
    alphas = {key: c[("alpha",)].coefficient(Monomial()) for key, c in ansatz_from_family(fam).coeffs.items()}
    c = alpha_potential(alphas, fam.n)
    if c is None:
        return None
    return GaugeTransformation.scaling({f: 1 / v for f, v in c.items()})
