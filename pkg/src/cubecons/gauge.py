"""Coordinate-wise changes of variables acting on map families, and the gauge slice.

A gauge g assigns each face a series g_ij(x) = c_ij x + sum_m b_ij^(m) x^m.
Conjugating a family by g means substituting x_ij -> g_ij(x_ij) in the
variables, so the new map is g^-1 o Phi o g.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .exactpoly import Monomial, Polynomial, format_rational, parse_rational
from .lattice import SYMMETRIC, Face, MapFamily, SeriesComponent, enumerate_faces, parse_face_label, roles
from .maps import UnivariateSeries, revert, univariate_compose
from .consistency import component_series


class BranchMismatch(ValueError):
    pass


@dataclass(frozen=True)
class GaugeTransformation:
    scalings: Mapping[Face, Fraction] = field(default_factory=dict)
    point_terms: Mapping[Face, Mapping[int, Fraction]] = field(default_factory=dict)

    def __post_init__(self):
        sc = {}
        for f, c in self.scalings.items():
            c = Fraction(c)
            if not c:
                raise ValueError(f"scaling for face {f} must be nonzero")
            if c != 1:
                sc[f] = c
        pt = {}
        for f, terms in self.point_terms.items():
            clean = {}
            for m, b in terms.items():
                if m < 2:
                    raise ValueError("point terms start at degree 2")
                b = Fraction(b)
                if b:
                    clean[int(m)] = b
            if clean:
                pt[f] = dict(sorted(clean.items()))
        object.__setattr__(self, "scalings", dict(sorted(sc.items())))
        object.__setattr__(self, "point_terms", dict(sorted(pt.items())))

    @classmethod
    def identity(cls) -> "GaugeTransformation":
        return cls()

    @classmethod
    def point(cls, b: Mapping[Face, object], m: int) -> "GaugeTransformation":
        """x_ij -> x_ij + b_ij x_ij^m."""
        return cls({}, {f: {m: v} for f, v in b.items()})

    @classmethod
    def scaling(cls, c: Mapping[Face, object]) -> "GaugeTransformation":
        return cls(dict(c), {})

    @classmethod
    def from_series(cls, series: Mapping[Face, UnivariateSeries]) -> "GaugeTransformation":
        return cls({f: s.linear for f, s in series.items()},
                   {f: {d: c for d, c in s.coeffs.items() if d >= 2} for f, s in series.items()})

    def is_identity(self) -> bool:
        return not self.scalings and not self.point_terms

    def series(self, face: Face, order: int) -> UnivariateSeries:
        coeffs = {1: self.scalings.get(face, Fraction(1))}
        coeffs.update(self.point_terms.get(face, {}))
        return UnivariateSeries(coeffs, order)

    def faces(self) -> set[Face]:
        return set(self.scalings) | set(self.point_terms)

    def to_json(self) -> dict:
        return {
            "scalings": {f.label: format_rational(c) for f, c in self.scalings.items()},
            "point": {f.label: {str(m): format_rational(b) for m, b in t.items()}
                      for f, t in self.point_terms.items()},
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "GaugeTransformation":
        sc = {parse_face_label(k): parse_rational(v) for k, v in doc.get("scalings", {}).items()}
        pt = {parse_face_label(k): {int(m): parse_rational(b) for m, b in t.items()}
              for k, t in doc.get("point", {}).items()}
        return cls(sc, pt)


def compose_gauges(first: GaugeTransformation, second: GaugeTransformation, order: int) -> GaugeTransformation:
    """Gauge h with conjugate(conjugate(fam, first), second) == conjugate(fam, h).

    As series, h_ij = first_ij o second_ij.
    """
    faces = first.faces() | second.faces()
    return GaugeTransformation.from_series({
        f: univariate_compose(first.series(f, order), second.series(f, order), order) for f in faces})


def conjugate(fam: MapFamily, g: GaugeTransformation) -> MapFamily:
    """The family expressed in new variables y with x_ij = g_ij(y_ij), truncated at fam.order."""
    if fam.symmetry != SYMMETRIC:
        raise ValueError("gauge transformations act on symmetric families only")
    if g.is_identity():
        return fam
    M = fam.order
    fwd = {f: g.series(f, M).to_polynomial(f.var) for f in enumerate_faces(fam.n)}
    inv = {f: revert(g.series(f, M), M) for f in enumerate_faces(fam.n)}
    comps = {}
    for face, k in fam.components:
        phi = component_series(fam, face, k, M)
        assign = {v: fwd[_face(v, face, k)] for v in roles(face, k)}
        q = phi.subst(assign, M)
        h = inv[face]
        out = Polynomial.zero()
        power = Polynomial.const(1)
        for d in range(1, M + 1):
            power = power.mul(q, M)
            c = h[d]
            if c:
                out = out + power.scale(c)
        body = out - Polynomial.var(face.var)
        parts = body.by_degree()
        if any(d < 2 for d in parts):
            raise AssertionError("conjugated map lost the identity leading term")
        comps[(face, k)] = SeriesComponent(face, k, parts)
    return MapFamily(fam.n, M, comps, fam.symmetry)


def _face(v: int, face: Face, k: int) -> Face:
    vij, vik, vjk = roles(face, k)
    return {vij: face, vik: Face(face.i, k), vjk: Face(face.j, k)}[v]


# -- the per-order kernel and the gauge slice ------------------------------


@dataclass(frozen=True)
class KernelParameters:
    """One constant b_ij per face."""

    b: Mapping[Face, Fraction]

    def get(self, face: Face) -> Fraction:
        return Fraction(self.b.get(face, 0))

    @classmethod
    def unit(cls, face: Face) -> "KernelParameters":
        return cls({face: Fraction(1)})


def kernel_element(params: KernelParameters, m: int, n: int = 4) -> dict[tuple[Face, int], Polynomial]:
    """Degree-(m+1) increments x_ik x_jk (m b_ij x_ij^(m-1) - b_ik x_ik^(m-1) - b_jk x_jk^(m-1))."""
    if m < 2:
        raise ValueError("m must be >= 2")
    out = {}
    for face in enumerate_faces(n):
        for k in range(1, n + 1):
            if k in face:
                continue
            vij, vik, vjk = roles(face, k)
            fik, fjk = Face(face.i, k), Face(face.j, k)
            base = Polynomial.monomial({vik: 1, vjk: 1})
            inner = (Polynomial.var(vij, m * params.get(face), m - 1)
                     - Polynomial.var(vik, params.get(fik), m - 1)
                     - Polynomial.var(vjk, params.get(fjk), m - 1))
            out[(face, k)] = base * inner
    return out


def point_gauge_shift(params: KernelParameters, m: int, n: int = 4) -> dict[tuple[Face, int], Polynomial]:
    """Closed-form change of A^(m+1) under x_ij -> x_ij + b_ij x_ij^m (the negated kernel element)."""
    return {key: -p for key, p in kernel_element(params, m, n).items()}


def slice_monomial(face: Face, k: int, m: int) -> Monomial:
    """x_ij^(m-1) x_ik x_jk, whose coefficient in A^(m+1) the gauge slice sets to zero."""
    vij, vik, vjk = roles(face, k)
    return Monomial({vij: m - 1, vik: 1, vjk: 1})


def is_darboux_leading(fam: MapFamily) -> bool:
    for face, k in fam.components:
        _, vik, vjk = roles(face, k)
        if fam.A(face, k, 2) != Polynomial.monomial({vik: 1, vjk: 1}):
            return False
    return True


def normal_form(fam: MapFamily) -> tuple[MapFamily, GaugeTransformation]:
    """Gauge-equivalent family with zero x_ij^(m-1) x_ik x_jk coefficient in every A^(m+1).

    Works order by order: the point change x_ij -> x_ij + b x_ij^m moves that
    coefficient of A^(m+1) by -m b and leaves lower degrees alone.
    """
    if fam.order < 2 or not is_darboux_leading(fam):
        raise BranchMismatch("normal_form needs leading terms A^(2) = x_ik x_jk in every component")
    total = GaugeTransformation.identity()
    for m in range(2, fam.order):
        b = {}
        for face in enumerate_faces(fam.n):
            k = min(d for d in range(1, fam.n + 1) if d not in face)
            c = fam.A(face, k, m + 1).coefficient(slice_monomial(face, k, m))
            if c:
                b[face] = c / m
        if b:
            step = GaugeTransformation.point(b, m)
            fam = conjugate(fam, step)
            total = compose_gauges(total, step, fam.order)
    return fam, total
