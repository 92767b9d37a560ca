"""Face variables of Z^N, the series map family, and its JSON file format."""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Callable, Iterable, Mapping

from .exactpoly import Monomial, Polynomial, format_rational, parse_rational

SYMMETRIC = "symmetric"
SKEW = "skew"
ROLES = ("ij", "ik", "jk")


class ParseError(ValueError):
    pass


class ValidationError(ValueError):
    def __init__(self, message: str, face=None, dir=None, degree=None, monomial=None):
        super().__init__(message)
        self.face = face
        self.dir = dir
        self.degree = degree
        self.monomial = monomial


@dataclass(frozen=True, order=True)
class Face:
    """Unordered pair of lattice directions, stored with i < j."""

    i: int
    j: int

    def __post_init__(self):
        if self.i == self.j:
            raise ValueError(f"face needs two distinct directions, got ({self.i}, {self.j})")
        if min(self.i, self.j) < 1:
            raise ValueError("directions are numbered from 1")
        if self.i > self.j:
            a, b = self.j, self.i
            object.__setattr__(self, "i", a)
            object.__setattr__(self, "j", b)

    @property
    def var(self) -> int:
        # colex index: independent of N
        return (self.j - 1) * (self.j - 2) // 2 + (self.i - 1)

    @property
    def label(self) -> str:
        return f"{self.i}{self.j}" if self.j < 10 else f"{self.i}_{self.j}"

    @property
    def name(self) -> str:
        return f"x{self.i}{self.j}" if self.j < 10 else f"x_{self.i}_{self.j}"

    def __contains__(self, k: int) -> bool:
        return k == self.i or k == self.j

    def __iter__(self):
        return iter((self.i, self.j))

    def __str__(self) -> str:
        return "{" + f"{self.i},{self.j}" + "}"


def face_of_var(var: int) -> Face:
    j = 2
    while (j - 1) * j // 2 <= var:
        j += 1
    i = var - (j - 1) * (j - 2) // 2 + 1
    return Face(i, j)


def var_name(var: int) -> str:
    return face_of_var(var).name


def parse_face_label(text: str) -> Face:
    text = text.strip().lstrip("x")
    if "_" in text:
        a, b = text.strip("_").split("_")
    elif len(text) == 2 and text.isdigit():
        a, b = text[0], text[1]
    else:
        raise ValueError(f"bad face label {text!r}")
    return Face(int(a), int(b))


def face_var(i: int, j: int) -> int:
    return Face(i, j).var


def x(i: int, j: int) -> Polynomial:
    """The face variable x_ij as a polynomial."""
    return Polynomial.var(face_var(i, j))


def enumerate_faces(n: int) -> list[Face]:
    if n < 3:
        raise ValueError("need N >= 3")
    return [Face(i, j) for i, j in itertools.combinations(range(1, n + 1), 2)]


def admissible_pairs(n: int) -> list[tuple[Face, int]]:
    """All (face, shift direction) pairs with the direction outside the face."""
    return [(f, k) for f in enumerate_faces(n) for k in range(1, n + 1) if k not in f]


def roles(face: Face, k: int) -> tuple[int, int, int]:
    """Variable ids playing the roles x_ij, x_ik, x_jk for component (face, k)."""
    return face.var, face_var(face.i, k), face_var(face.j, k)


def role_signs(face: Face, k: int, symmetry: str) -> tuple[int, int, int]:
    """Signs relating oriented role values to stored values (skew: x_ki = -x_ik)."""
    if symmetry == SYMMETRIC:
        return 1, 1, 1
    return 1, (1 if face.i < k else -1), (1 if face.j < k else -1)


def role_polynomial(face: Face, k: int, terms: Iterable[tuple[object, tuple[int, int, int]]]) -> Polynomial:
    """Build sum c * x_ij^a x_ik^b x_jk^c from (coeff, (a, b, c)) pairs."""
    vij, vik, vjk = roles(face, k)
    out = {}
    for c, (a, b, d) in terms:
        mono = Monomial({vij: a, vik: b, vjk: d})
        out[mono] = out.get(mono, Fraction(0)) + Fraction(c)
    return Polynomial(out)


@dataclass(frozen=True)
class SeriesComponent:
    """T_k x_ij - x_ij split into homogeneous pieces of degree >= 2."""

    face: Face
    dir: int
    terms_by_degree: Mapping[int, Polynomial] = field(default_factory=dict)

    def __post_init__(self):
        clean = {m: p for m, p in sorted(self.terms_by_degree.items()) if p}
        object.__setattr__(self, "terms_by_degree", clean)

    def degree(self, m: int) -> Polynomial:
        return self.terms_by_degree.get(m, Polynomial.zero())

    def polynomial(self, max_degree: int | None = None) -> Polynomial:
        total = Polynomial.zero()
        for m, p in self.terms_by_degree.items():
            if max_degree is None or m <= max_degree:
                total = total + p
        return total

    def validate(self, order: int | None = None) -> None:
        allowed = set(roles(self.face, self.dir))
        for m, p in self.terms_by_degree.items():
            if m < 2:
                raise ValidationError(
                    f"component ({self.face}, {self.dir}): degree {m} terms are not allowed",
                    self.face, self.dir, m)
            if order is not None and m > order:
                raise ValidationError(
                    f"component ({self.face}, {self.dir}): degree {m} exceeds order {order}",
                    self.face, self.dir, m)
            for mono, _ in p.terms():
                if mono.degree != m:
                    raise ValidationError(
                        f"component ({self.face}, {self.dir}): degree-{m} slice holds a "
                        f"monomial of degree {mono.degree}", self.face, self.dir, m, mono)
                stray = set(mono.exponents) - allowed
                if stray:
                    raise ValidationError(
                        f"component ({self.face}, {self.dir}), degree {m}: variable(s) "
                        f"{sorted(var_name(v) for v in stray)} outside "
                        f"{{x_ij, x_ik, x_jk}}", self.face, self.dir, m, mono)


@dataclass(frozen=True)
class MapFamily:
    """All components A_{ij;k}^{(m)}, 2 <= m <= order, of the maps on Z^n."""

    n: int
    order: int
    components: Mapping[tuple[Face, int], SeriesComponent]
    symmetry: str = SYMMETRIC

    def __post_init__(self):
        if self.n < 3:
            raise ValidationError("lattice dimension must be >= 3")
        if self.order < 1:
            raise ValidationError("order must be >= 1")
        if self.symmetry not in (SYMMETRIC, SKEW):
            raise ValidationError(f"unknown symmetry {self.symmetry!r}")
        pairs = admissible_pairs(self.n)
        known = set(pairs)
        for key in self.components:
            if key not in known:
                raise ValidationError(f"no admissible component {key} for N={self.n}",
                                      key[0], key[1])
        full = {}
        for key in pairs:
            comp = self.components.get(key) or SeriesComponent(*key)
            comp.validate(self.order)
            full[key] = comp
        object.__setattr__(self, "components", full)

    @classmethod
    def identity(cls, n: int = 4, order: int = 1, symmetry: str = SYMMETRIC) -> "MapFamily":
        return cls(n, order, {}, symmetry)

    @classmethod
    def from_polynomials(cls, n: int, order: int, polys: Mapping[tuple[Face, int], Polynomial],
                         symmetry: str = SYMMETRIC) -> "MapFamily":
        """Split full polynomials A_{ij;k} (all degrees) into homogeneous slices."""
        comps = {}
        for key, p in polys.items():
            comps[key] = SeriesComponent(key[0], key[1], p.by_degree())
        return cls(n, order, comps, symmetry)

    def keys(self) -> list[tuple[Face, int]]:
        return list(self.components)

    def A(self, face: Face, k: int, m: int) -> Polynomial:
        return self.components[(face, k)].degree(m)

    def slice(self, m: int) -> dict[tuple[Face, int], Polynomial]:
        return {key: c.degree(m) for key, c in self.components.items()}

    def truncated(self, order: int) -> "MapFamily":
        comps = {
            key: SeriesComponent(key[0], key[1], {m: p for m, p in c.terms_by_degree.items() if m <= order})
            for key, c in self.components.items()
        }
        return MapFamily(self.n, order, comps, self.symmetry)

    def with_order(self, order: int) -> "MapFamily":
        """Same components, declared truncation ``order`` (must cover the stored degrees)."""
        return MapFamily(self.n, order, self.components, self.symmetry)

    def with_slice(self, m: int, polys: Mapping[tuple[Face, int], Polynomial], add: bool = False) -> "MapFamily":
        """Replace (or add to) the degree-m slice of every listed component."""
        comps = {}
        for key, c in self.components.items():
            tbd = dict(c.terms_by_degree)
            if key in polys:
                tbd[m] = (tbd.get(m, Polynomial.zero()) + polys[key]) if add else polys[key]
            comps[key] = SeriesComponent(key[0], key[1], tbd)
        return MapFamily(self.n, max(self.order, m), comps, self.symmetry)

    def max_degree(self) -> int:
        return max((max(c.terms_by_degree, default=1) for c in self.components.values()), default=1)


def family_from_roles(n: int, order: int, role_terms: Mapping[int, Iterable[tuple[object, tuple[int, int, int]]]],
                      symmetry: str = SYMMETRIC) -> MapFamily:
    """Family whose every component is the same polynomial in the roles (x_ij, x_ik, x_jk)."""
    role_terms = {m: list(t) for m, t in role_terms.items() if m <= order}
    comps = {}
    for face, k in admissible_pairs(n):
        comps[(face, k)] = SeriesComponent(
            face, k, {m: role_polynomial(face, k, t) for m, t in role_terms.items()})
    return MapFamily(n, order, comps, symmetry)


def permute_family(fam: MapFamily, sigma: Mapping[int, int]) -> MapFamily:
    """Relabel lattice directions by the permutation ``sigma``."""
    subst = {f.var: Polynomial.var(Face(sigma[f.i], sigma[f.j]).var) for f in enumerate_faces(fam.n)}
    comps = {}
    for (face, k), c in fam.components.items():
        nf, nk = Face(sigma[face.i], sigma[face.j]), sigma[k]
        comps[(nf, nk)] = SeriesComponent(
            nf, nk, {m: p.subst(subst, m) for m, p in c.terms_by_degree.items()})
    return MapFamily(fam.n, fam.order, comps, fam.symmetry)


@dataclass
class PointState:
    """Values of all face variables at one lattice vertex."""

    values: dict[Face, object]
    symmetry: str = SYMMETRIC

    def get(self, a: int, b: int):
        v = self.values[Face(a, b)]
        if self.symmetry == SKEW and a > b:
            return -v
        return v

    def by_var(self) -> dict[int, object]:
        return {f.var: v for f, v in self.values.items()}


# -- file format -----------------------------------------------------------


def _role_of(face: Face, k: int, key: str) -> int:
    vij, vik, vjk = roles(face, k)
    if key in ROLES:
        return {"ij": vij, "ik": vik, "jk": vjk}[key]
    try:
        f = parse_face_label(key)
    except ValueError as exc:
        raise ParseError(f"bad exponent key {key!r}") from exc
    return f.var


def _component_from_json(doc: Mapping, n: int, symmetry: str) -> SeriesComponent:
    try:
        fi, fj = doc["face"]
        face = Face(int(fi), int(fj))
        k = int(doc["dir"])
        terms = doc.get("terms", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed component {doc!r}: {exc}") from exc
    if k in face or not 1 <= k <= n or face.j > n:
        raise ValidationError(f"inadmissible component face {face} dir {k}", face, k)
    by_deg: dict[int, dict[Monomial, Fraction]] = {}
    allowed = set(roles(face, k))
    for t in terms:
        try:
            coeff = parse_rational(t["coeff"])
            exps_doc = t["exps"]
            exps = {}
            for key, e in exps_doc.items():
                if isinstance(e, bool) or not isinstance(e, int) or e < 0:
                    raise ParseError(f"bad exponent {e!r}")
                v = _role_of(face, k, key)
                exps[v] = exps.get(v, 0) + e
        except ParseError:
            raise
        except (KeyError, TypeError, ValueError, AttributeError) as exc:
            raise ParseError(f"malformed term {t!r} in component {face}/{k}: {exc}") from exc
        mono = Monomial(exps)
        stray = set(mono.exponents) - allowed
        if stray:
            raise ValidationError(
                f"component ({face}, {k}): variable(s) {sorted(var_name(v) for v in stray)} "
                f"outside {{x_ij, x_ik, x_jk}}", face, k, mono.degree, mono)
        slot = by_deg.setdefault(mono.degree, {})
        slot[mono] = slot.get(mono, Fraction(0)) + coeff
    return SeriesComponent(face, k, {m: Polynomial(t) for m, t in by_deg.items()})


def family_from_json(doc: Mapping) -> MapFamily:
    if not isinstance(doc, Mapping):
        raise ParseError("top level must be an object")
    try:
        n = int(doc.get("n", 4))
        order = int(doc["order"])
        symmetry = doc.get("symmetry", SYMMETRIC)
        comps_doc = doc.get("components", [])
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"malformed family header: {exc}") from exc
    if not isinstance(comps_doc, list):
        raise ParseError("components must be a list")
    comps = {}
    for cd in comps_doc:
        c = _component_from_json(cd, n, symmetry)
        key = (c.face, c.dir)
        if key in comps:
            raise ValidationError(f"duplicate component {c.face}/{c.dir}", c.face, c.dir)
        comps[key] = c
    return MapFamily(n, order, comps, symmetry)


def family_to_json(fam: MapFamily) -> dict:
    comps = []
    for (face, k), c in fam.components.items():
        vij, vik, vjk = roles(face, k)
        names = {vij: "ij", vik: "ik", vjk: "jk"}
        terms = []
        for m in sorted(c.terms_by_degree):
            for mono, coeff in c.terms_by_degree[m].terms():
                exps = {names[v]: e for v, e in sorted(mono.exponents.items(), key=lambda ve: ROLES.index(names[ve[0]]))}
                terms.append({"coeff": format_rational(coeff), "exps": exps})
        comps.append({"face": [face.i, face.j], "dir": k, "terms": terms})
    return {"n": fam.n, "order": fam.order, "symmetry": fam.symmetry, "components": comps}


def load_map_family(path: str | Path) -> MapFamily:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON: {exc}") from exc
    return family_from_json(doc)


def dumps_family(fam: MapFamily) -> str:
    return json.dumps(family_to_json(fam), indent=1) + "\n"


def save_map_family(fam: MapFamily, path: str | Path) -> None:
    Path(path).write_text(dumps_family(fam))


def namer_for(extra: Mapping[int, str] | None = None) -> Callable[[int], str]:
    extra = dict(extra or {})

    def name(v: int) -> str:
        return extra[v] if v in extra else var_name(v)

    return name
