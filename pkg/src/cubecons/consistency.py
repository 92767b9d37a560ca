"""Residuals of the 4D consistency equations T_l(T_k x_ij) = T_k(T_l x_ij)."""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .exactpoly import Polynomial
from .lattice import SYMMETRIC, Face, MapFamily, PointState, enumerate_faces, role_signs, roles, var_name
from .maps import EXACT, ClosedFormMap, eval_closed_form

EquationKey = tuple[Face, int, int]


def equation_keys(n: int) -> list[EquationKey]:
    """(face, k, l) with k < l outside the face; six for N = 4."""
    out = []
    for face in enumerate_faces(n):
        rest = [d for d in range(1, n + 1) if d not in face]
        out.extend((face, k, l) for k, l in itertools.combinations(rest, 2))
    return out


def component_series(fam: MapFamily, face: Face, k: int, max_degree: int | None = None) -> Polynomial:
    """x_ij + sum_m A_{ij;k}^{(m)}, written in stored (canonical) face variables."""
    body = fam.components[(face, k)].polynomial(max_degree)
    if fam.symmetry != SYMMETRIC:
        vij, vik, vjk = roles(face, k)
        _, sik, sjk = role_signs(face, k, fam.symmetry)
        if sik < 0 or sjk < 0:
            sub = {v: Polynomial.var(v) for v in (vij, vik, vjk)}
            if sik < 0:
                sub[vik] = Polynomial.var(vik, -1)
            if sjk < 0:
                sub[vjk] = Polynomial.var(vjk, -1)
            body = body.subst(sub, max(body.degree(), 0))
    return Polynomial.var(face.var) + body


def first_stage(fam: MapFamily, max_degree: int | None = None) -> dict[int, dict[Face, Polynomial]]:
    """T_k x_ij for every direction k and every face not containing k."""
    top = fam.order if max_degree is None else max_degree
    images: dict[int, dict[Face, Polynomial]] = {k: {} for k in range(1, fam.n + 1)}
    for face, k in fam.components:
        images[k][face] = component_series(fam, face, k, top)
    return images


def _second(fam: MapFamily, images, face: Face, k: int, l: int, max_degree: int) -> Polynomial:
    """T_l(T_k x_ij): the map for (face, k) evaluated on T_l-shifted data."""
    src = images[k][face]
    assign = {v: images[l][face_of] for v, face_of in _arg_faces(face, k).items()}
    return src.subst(assign, max_degree)


def _arg_faces(face: Face, k: int) -> dict[int, Face]:
    vij, vik, vjk = roles(face, k)
    return {vij: face, vik: Face(face.i, k), vjk: Face(face.j, k)}


def pair_residual(fam: MapFamily, face: Face, k: int, l: int, max_degree: int,
                  images=None) -> Polynomial:
    """T_l(T_k x_ij) - T_k(T_l x_ij), truncated at ``max_degree``, for any order of k, l."""
    if images is None:
        images = first_stage(fam, max_degree)
    return _second(fam, images, face, k, l, max_degree) - _second(fam, images, face, l, k, max_degree)


@dataclass
class ResidualReport:
    n: int
    max_degree: int
    residuals: dict[EquationKey, dict[int, Polynomial]] = field(default_factory=dict)

    def get(self, face: Face, k: int, l: int, degree: int) -> Polynomial:
        if k > l:
            return -self.residuals[(face, l, k)][degree]
        return self.residuals[(face, k, l)][degree]

    def nonzero(self) -> list[tuple[int, EquationKey]]:
        out = [(d, key) for key, by in self.residuals.items() for d, p in by.items() if p]
        return sorted(out, key=lambda t: (t[0], t[1][0], t[1][1], t[1][2]))

    @property
    def first_failure(self) -> tuple[int, EquationKey] | None:
        bad = self.nonzero()
        return bad[0] if bad else None

    @property
    def consistent_up_to(self) -> int:
        ff = self.first_failure
        return self.max_degree if ff is None else ff[0] - 1

    def to_json(self) -> dict:
        eqs = []
        for (face, k, l), by in self.residuals.items():
            degrees = {}
            for d, p in sorted(by.items()):
                degrees[str(d)] = "zero" if not p else p.to_records(var_name)
            eqs.append({"face": [face.i, face.j], "pair": [k, l], "degrees": degrees})
        ff = self.first_failure
        return {
            "verdict": "consistent" if ff is None else "inconsistent",
            "max_degree": self.max_degree,
            "consistent_up_to": self.consistent_up_to,
            "first_failure": None if ff is None else {
                "degree": ff[0], "face": [ff[1][0].i, ff[1][0].j], "pair": [ff[1][1], ff[1][2]]},
            "equations": eqs,
        }


def second_stage_residual(fam: MapFamily, max_degree: int | None = None) -> ResidualReport:
    if max_degree is None:
        max_degree = fam.order
    if max_degree > fam.order:
        raise ValueError(f"max_degree {max_degree} exceeds family order {fam.order}")
    images = first_stage(fam, max_degree)
    report = ResidualReport(fam.n, max_degree)
    for face, k, l in equation_keys(fam.n):
        res = pair_residual(fam, face, k, l, max_degree, images)
        parts = res.by_degree()
        low = {d: p for d, p in parts.items() if d < 2}
        if low:
            raise AssertionError(f"residual has degree <2 part {low}; leading terms are not the identity")
        report.residuals[(face, k, l)] = {d: parts.get(d, Polynomial.zero()) for d in range(2, max_degree + 1)}
    return report


def residual_is_zero(report: ResidualReport) -> bool:
    return all(not p for by in report.residuals.values() for p in by.values())


# -- closed-form evaluation ------------------------------------------------


def shift_state(cmap: ClosedFormMap, state: PointState, l: int, n: int, mode: str, margin: float = 0.0) -> PointState:
    """T_l applied to every face not containing l (canonical orientation)."""
    vals = {}
    for face in enumerate_faces(n):
        if l in face:
            continue
        vals[face] = eval_closed_form(cmap, (face.i, face.j), l, state, mode, margin)
    return PointState(vals, state.symmetry)


def numeric_residual(cmap: ClosedFormMap, state: PointState, mode: str = EXACT, n: int = 4,
                     margin: float = 0.0) -> dict[EquationKey, object]:
    """|T_l T_k x_ij - T_k T_l x_ij| on the six equations. Exact mode returns Fractions."""
    if state.symmetry != cmap.symmetry:
        state = PointState(state.values, cmap.symmetry)
    shifted = {l: shift_state(cmap, state, l, n, mode, margin) for l in range(1, n + 1)}
    out = {}
    for face, k, l in equation_keys(n):
        lk = eval_closed_form(cmap, (face.i, face.j), k, shifted[l], mode, margin)
        kl = eval_closed_form(cmap, (face.i, face.j), l, shifted[k], mode, margin)
        out[(face, k, l)] = abs(lk - kl)
    return out


def zero_state(n: int = 4, symmetry: str = SYMMETRIC) -> PointState:
    return PointState({f: Fraction(0) for f in enumerate_faces(n)}, symmetry)
