"""Exact arithmetic: rationals, sparse multivariate polynomials, rational linear algebra.

Variables are small non-negative integer ids. A monomial is packed into a
single Python int, 16 bits per variable slot, so monomial multiplication is
integer addition and the total degree is ``key % 0xFFFF``. Exponents must
stay below 2**16.
"""

from __future__ import annotations

import re
from collections import defaultdict
from fractions import Fraction
from typing import Callable, Iterable, Iterator, Mapping, Sequence

Rational = Fraction

_BITS = 16
_MASK = (1 << _BITS) - 1
_DEG_MOD = _MASK  # 2**16 == 1 (mod 2**16 - 1)

_RATIONAL_RE = re.compile(r"^\s*([+-]?\d+)(?:\s*/\s*(\d+))?\s*$")


class MissingAssignment(KeyError):
    pass


class Inconsistent(ArithmeticError):
    """Raised when a linear system has no solution.

    ``rows`` holds the original row indices at which the contradiction
    ``0 = nonzero`` surfaced during elimination.
    """

    def __init__(self, message: str, rows: Sequence[int] = ()):
        super().__init__(message)
        self.rows = list(rows)


def parse_rational(text: str | int | Fraction) -> Fraction:
    if isinstance(text, Fraction):
        return text
    if isinstance(text, bool):
        raise ValueError(f"not a rational: {text!r}")
    if isinstance(text, int):
        return Fraction(text)
    if not isinstance(text, str):
        raise ValueError(f"not a rational: {text!r}")
    m = _RATIONAL_RE.match(text)
    if m is None:
        raise ValueError(f"not a rational: {text!r}")
    den = int(m.group(2)) if m.group(2) is not None else 1
    if den == 0:
        raise ValueError(f"zero denominator: {text!r}")
    return Fraction(int(m.group(1)), den)


def format_rational(q: Fraction | int) -> str:
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return f"{q.numerator}/{q.denominator}"


# -- monomials -------------------------------------------------------------


def _key_degree(key: int) -> int:
    return key % _DEG_MOD if key else 0


def _key_items(key: int) -> list[tuple[int, int]]:
    out = []
    v = 0
    while key:
        e = key & _MASK
        if e:
            out.append((v, e))
        key >>= _BITS
        v += 1
    return out


def _key_exp(key: int, var: int) -> int:
    return (key >> (_BITS * var)) & _MASK


def _var_key(var: int, exp: int = 1) -> int:
    if var < 0:
        raise ValueError(f"variable ids must be non-negative, got {var}")
    if not 0 <= exp <= _MASK:
        raise ValueError(f"exponent out of range: {exp}")
    return exp << (_BITS * var)


def _sort_key(key: int) -> tuple:
    return (_key_degree(key), tuple(_key_items(key)))


class Monomial:
    """Product of variables with positive exponents."""

    __slots__ = ("key",)

    def __init__(self, exponents: Mapping[int, int] | None = None):
        key = 0
        for v, e in (exponents or {}).items():
            if e < 0:
                raise ValueError("negative exponent")
            if e:
                key += _var_key(v, e)
        self.key = key

    @classmethod
    def from_key(cls, key: int) -> "Monomial":
        m = cls.__new__(cls)
        m.key = key
        return m

    @property
    def exponents(self) -> dict[int, int]:
        return dict(_key_items(self.key))

    @property
    def degree(self) -> int:
        return _key_degree(self.key)

    def sort_key(self) -> tuple:
        return _sort_key(self.key)

    def __mul__(self, other: "Monomial") -> "Monomial":
        return Monomial.from_key(self.key + other.key)

    def __eq__(self, other) -> bool:
        return isinstance(other, Monomial) and self.key == other.key

    def __lt__(self, other: "Monomial") -> bool:
        return self.sort_key() < other.sort_key()

    def __hash__(self) -> int:
        return hash(("mono", self.key))

    def __repr__(self) -> str:
        return f"Monomial({self.exponents})"


def default_namer(var: int) -> str:
    return f"v{var}"


# -- polynomials -----------------------------------------------------------


class Polynomial:
    """Immutable sparse polynomial over Q. Zero coefficients are never stored."""

    __slots__ = ("_terms", "_hash")

    def __init__(self, terms: Mapping[Monomial, object] | None = None):
        d: dict[int, Fraction] = {}
        for mono, c in (terms or {}).items():
            c = Fraction(c)
            if c:
                k = mono.key
                s = d.get(k, 0) + c
                if s:
                    d[k] = s
                else:
                    d.pop(k, None)
        self._terms = d
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict[int, Fraction]) -> "Polynomial":
        p = cls.__new__(cls)
        p._terms = terms
        p._hash = None
        return p

    @classmethod
    def zero(cls) -> "Polynomial":
        return cls._raw({})

    @classmethod
    def const(cls, c) -> "Polynomial":
        c = Fraction(c)
        return cls._raw({0: c} if c else {})

    @classmethod
    def var(cls, v: int, coeff=1, exp: int = 1) -> "Polynomial":
        c = Fraction(coeff)
        return cls._raw({_var_key(v, exp): c} if c else {})

    @classmethod
    def monomial(cls, exponents: Mapping[int, int], coeff=1) -> "Polynomial":
        c = Fraction(coeff)
        return cls._raw({Monomial(exponents).key: c} if c else {})

    # basic queries

    def is_zero(self) -> bool:
        return not self._terms

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def terms(self) -> list[tuple[Monomial, Fraction]]:
        """Terms in canonical (graded, then lex on variable ids) order."""
        return [(Monomial.from_key(k), self._terms[k]) for k in sorted(self._terms, key=_sort_key)]

    def items(self) -> Iterator[tuple[int, Fraction]]:
        return iter(self._terms.items())

    def coefficient(self, mono: Monomial) -> Fraction:
        return self._terms.get(mono.key, Fraction(0))

    def degree(self) -> int:
        return max((_key_degree(k) for k in self._terms), default=-1)

    def low_degree(self) -> int:
        return min((_key_degree(k) for k in self._terms), default=-1)

    def variables(self) -> set[int]:
        out: set[int] = set()
        for k in self._terms:
            out.update(v for v, _ in _key_items(k))
        return out

    def is_homogeneous(self, d: int) -> bool:
        return all(_key_degree(k) == d for k in self._terms)

    def homogeneous_part(self, d: int) -> "Polynomial":
        return Polynomial._raw({k: c for k, c in self._terms.items() if _key_degree(k) == d})

    def by_degree(self) -> dict[int, "Polynomial"]:
        parts: dict[int, dict[int, Fraction]] = defaultdict(dict)
        for k, c in self._terms.items():
            parts[_key_degree(k)][k] = c
        return {d: Polynomial._raw(t) for d, t in sorted(parts.items())}

    def truncate(self, max_degree: int) -> "Polynomial":
        return Polynomial._raw({k: c for k, c in self._terms.items() if _key_degree(k) <= max_degree})

    # arithmetic

    def __add__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.const(other)
        if len(other._terms) > len(self._terms):
            a, b = other._terms, self._terms
        else:
            a, b = self._terms, other._terms
        d = dict(a)
        for k, c in b.items():
            s = d.get(k, 0) + c
            if s:
                d[k] = s
            else:
                d.pop(k, None)
        return Polynomial._raw(d)

    __radd__ = __add__

    def __neg__(self) -> "Polynomial":
        return Polynomial._raw({k: -c for k, c in self._terms.items()})

    def __sub__(self, other: "Polynomial") -> "Polynomial":
        if not isinstance(other, Polynomial):
            other = Polynomial.const(other)
        return self + (-other)

    def __rsub__(self, other) -> "Polynomial":
        return Polynomial.const(other) - self

    def scale(self, c) -> "Polynomial":
        c = Fraction(c)
        if not c:
            return Polynomial.zero()
        return Polynomial._raw({k: v * c for k, v in self._terms.items()})

    def __mul__(self, other) -> "Polynomial":
        if isinstance(other, Polynomial):
            return self.mul(other)
        return self.scale(other)

    def __rmul__(self, other) -> "Polynomial":
        return self.scale(other)

    def mul(self, other: "Polynomial", max_degree: int | None = None) -> "Polynomial":
        if not self._terms or not other._terms:
            return Polynomial.zero()
        acc: dict[int, Fraction] = {}
        get = acc.get
        if max_degree is None:
            for ka, ca in self._terms.items():
                for kb, cb in other._terms.items():
                    k = ka + kb
                    acc[k] = get(k, 0) + ca * cb
        else:
            buckets: dict[int, list[tuple[int, Fraction]]] = defaultdict(list)
            for kb, cb in other._terms.items():
                buckets[_key_degree(kb)].append((kb, cb))
            ordered = sorted(buckets.items())
            for ka, ca in self._terms.items():
                room = max_degree - _key_degree(ka)
                for db, items in ordered:
                    if db > room:
                        break
                    for kb, cb in items:
                        k = ka + kb
                        acc[k] = get(k, 0) + ca * cb
        return Polynomial._raw({k: c for k, c in acc.items() if c})

    def pow(self, n: int, max_degree: int | None = None) -> "Polynomial":
        if n < 0:
            raise ValueError("negative power")
        result = Polynomial.const(1)
        base = self
        while n:
            if n & 1:
                result = result.mul(base, max_degree)
            n >>= 1
            if n:
                base = base.mul(base, max_degree)
        return result if max_degree is None else result.truncate(max_degree)

    def diff(self, v: int) -> "Polynomial":
        shift = _BITS * v
        unit = 1 << shift
        out = {}
        for k, c in self._terms.items():
            e = (k >> shift) & _MASK
            if e:
                out[k - unit] = c * e
        return Polynomial._raw(out)

    def subst(self, assignment: Mapping[int, "Polynomial"], max_degree: int) -> "Polynomial":
        """Compose: replace each variable by a polynomial, truncating above ``max_degree``.

        Variables without an assignment raise MissingAssignment.
        """
        if max_degree < 0:
            raise ValueError("max_degree must be >= 0")
        variables = sorted(self.variables())
        missing = [v for v in variables if v not in assignment]
        if missing:
            raise MissingAssignment(f"no assignment for variables {missing}")
        images = [assignment[v] for v in variables]
        lows = [max(p.low_degree(), 0) for p in images]
        powers: list[dict[int, Polynomial]] = [dict() for _ in variables]

        def power(idx: int, e: int, budget: int) -> Polynomial:
            # cached at the full max_degree; truncated on use
            cache = powers[idx]
            if e not in cache:
                if e == 0:
                    cache[e] = Polynomial.const(1)
                elif e - 1 in cache:
                    cache[e] = cache[e - 1].mul(images[idx], max_degree)
                else:
                    cache[e] = images[idx].pow(e, max_degree)
            return cache[e]

        def rec(terms: dict[int, Fraction], idx: int, budget: int) -> Polynomial:
            if budget < 0:
                return Polynomial.zero()
            if idx == len(variables):
                c = sum(terms.values(), Fraction(0))
                return Polynomial.const(c)
            shift = _BITS * variables[idx]
            groups: dict[int, dict[int, Fraction]] = defaultdict(dict)
            for k, c in terms.items():
                e = (k >> shift) & _MASK
                groups[e][k - (e << shift)] = c
            total = Polynomial.zero()
            for e, sub in groups.items():
                inner_budget = budget - e * lows[idx]
                if inner_budget < 0:
                    continue
                inner = rec(sub, idx + 1, inner_budget)
                if not inner:
                    continue
                if e == 0:
                    total = total + inner
                else:
                    total = total + inner.mul(power(idx, e, budget), budget)
            return total

        return rec(dict(self._terms), 0, max_degree).truncate(max_degree)

    def evaluate(self, values: Mapping[int, object]):
        """Evaluate at a point; values may be Fractions or floats."""
        total = 0
        for k, c in self._terms.items():
            t = c if not any(isinstance(x, float) for x in values.values()) else float(c)
            for v, e in _key_items(k):
                t = t * values[v] ** e
            total = total + t
        return total

    # comparison / display

    def __eq__(self, other) -> bool:
        if isinstance(other, Polynomial):
            return self._terms == other._terms
        if isinstance(other, (int, Fraction)):
            return self == Polynomial.const(other)
        return NotImplemented

    def __hash__(self) -> int:
        if self._hash is None:
            self._hash = hash(frozenset(self._terms.items()))
        return self._hash

    def format(self, namer: Callable[[int], str] = default_namer) -> str:
        if not self._terms:
            return "0"
        parts = []
        for mono, c in self.terms():
            factors = []
            for v, e in _key_items(mono.key):
                factors.append(namer(v) if e == 1 else f"{namer(v)}^{e}")
            body = "*".join(factors)
            if not body:
                parts.append(format_rational(c))
            elif c == 1:
                parts.append(body)
            elif c == -1:
                parts.append("-" + body)
            else:
                parts.append(f"{format_rational(c)}*{body}")
        return " + ".join(parts).replace("+ -", "- ")

    def __repr__(self) -> str:
        return f"Polynomial({self.format()})"

    # serialization

    def to_records(self, namer: Callable[[int], str] | None = None) -> list[dict]:
        out = []
        for mono, c in self.terms():
            exps = {(namer(v) if namer else str(v)): e for v, e in _key_items(mono.key)}
            out.append({"coeff": format_rational(c), "exponents": exps})
        return out

    @classmethod
    def from_records(cls, records: Iterable[Mapping], parse_var: Callable[[str], int] = int) -> "Polynomial":
        terms: dict[Monomial, Fraction] = {}
        for rec in records:
            mono = Monomial({parse_var(k): int(e) for k, e in rec["exponents"].items()})
            terms[mono] = terms.get(mono, Fraction(0)) + parse_rational(rec["coeff"])
        return cls(terms)


# Thin functional surface.


def poly_add(a: Polynomial, b: Polynomial) -> Polynomial:
    return a + b


def poly_mul(a: Polynomial, b: Polynomial, max_degree: int | None = None) -> Polynomial:
    if max_degree is not None and max_degree < 0:
        raise ValueError("max_degree must be >= 0")
    return a.mul(b, max_degree)


def poly_diff(a: Polynomial, v: int) -> Polynomial:
    return a.diff(v)


def poly_subst(a: Polynomial, assignment: Mapping[int, Polynomial], max_degree: int) -> Polynomial:
    return a.subst(assignment, max_degree)


def coefficient_of(a: Polynomial, m: Monomial) -> Fraction:
    return a.coefficient(m)


def coefficient_in(a: Polynomial, m: Monomial, over: Iterable[int]) -> Polynomial:
    """Coefficient of the monomial ``m`` in the variables ``over``.

    The result is a polynomial in the remaining variables, which is how
    symbolic coefficients (extra variables) are read off.
    """
    over = set(over)
    out: dict[int, Fraction] = {}
    for k, c in a.items():
        proj = 0
        for v, e in _key_items(k):
            if v in over:
                proj += _var_key(v, e)
        if proj == m.key:
            rest = k - proj
            out[rest] = out.get(rest, 0) + c
    return Polynomial._raw({k: c for k, c in out.items() if c})


def split_by(a: Polynomial, over: Iterable[int]) -> dict[Monomial, Polynomial]:
    """Group ``a`` by its monomials in ``over``; values are coefficient polynomials."""
    over = set(over)
    groups: dict[int, dict[int, Fraction]] = defaultdict(dict)
    for k, c in a.items():
        proj = 0
        for v, e in _key_items(k):
            if v in over:
                proj += _var_key(v, e)
        groups[proj][k - proj] = c
    return {
        Monomial.from_key(p): Polynomial._raw(t)
        for p, t in sorted(groups.items(), key=lambda kv: _sort_key(kv[0]))
    }


def monomials_of_degree(variables: Sequence[int], degree: int) -> list[Monomial]:
    """All monomials of exact total degree in the given variables, canonical order."""
    variables = sorted(variables)
    out: list[int] = []

    def rec(i: int, left: int, key: int):
        if i == len(variables) - 1:
            out.append(key + _var_key(variables[i], left))
            return
        for e in range(left, -1, -1):
            rec(i + 1, left - e, key + _var_key(variables[i], e))

    if not variables:
        return [Monomial.from_key(0)] if degree == 0 else []
    rec(0, degree, 0)
    return [Monomial.from_key(k) for k in sorted(out, key=_sort_key)]


# -- linear algebra --------------------------------------------------------


class RationalMatrix:
    """Sparse exact matrix; each row is a dict column -> nonzero Fraction."""

    def __init__(self, rows: int, cols: int, entries: Iterable[Mapping[int, object]] | None = None):
        self.nrows = rows
        self.ncols = cols
        data = []
        for r in entries if entries is not None else [{} for _ in range(rows)]:
            row = {}
            for c, v in r.items():
                if not 0 <= c < cols:
                    raise IndexError(f"column {c} out of range")
                v = Fraction(v)
                if v:
                    row[c] = v
            data.append(row)
        if len(data) != rows:
            raise ValueError(f"expected {rows} rows, got {len(data)}")
        self.rows = data

    @classmethod
    def from_dense(cls, dense: Sequence[Sequence[object]]) -> "RationalMatrix":
        nrows = len(dense)
        ncols = len(dense[0]) if nrows else 0
        return cls(nrows, ncols, [{c: v for c, v in enumerate(row) if v} for row in dense])

    @classmethod
    def identity(cls, n: int) -> "RationalMatrix":
        return cls(n, n, [{i: 1} for i in range(n)])

    def to_dense(self) -> list[list[Fraction]]:
        return [[row.get(c, Fraction(0)) for c in range(self.ncols)] for row in self.rows]

    def apply(self, vec: Sequence[Fraction]) -> list[Fraction]:
        if len(vec) != self.ncols:
            raise ValueError("dimension mismatch")
        return [sum((v * vec[c] for c, v in row.items()), Fraction(0)) for row in self.rows]

    def nnz(self) -> int:
        return sum(len(r) for r in self.rows)

    def rref(self) -> tuple[list[dict[int, Fraction]], list[int]]:
        """Reduced row-echelon form. Returns (nonzero reduced rows, pivot columns)."""
        reduced, pivots, _ = _gauss_jordan([dict(r) for r in self.rows], self.ncols)
        return reduced, pivots

    def rank(self) -> int:
        return len(self.rref()[1])


def _gauss_jordan(rows: list[dict[int, Fraction]], ncols: int):
    """In-place Gauss-Jordan on sparse rows restricted to columns < ncols.

    Entries at column index >= ncols (an augmented right-hand side) are carried
    along but never pivoted on. Pivot choice is deterministic: columns in
    increasing order, first remaining row (original order) with a nonzero
    entry.
    """
    origin = list(range(len(rows)))
    col_rows: dict[int, set[int]] = defaultdict(set)
    for r, row in enumerate(rows):
        for c in row:
            if c < ncols:
                col_rows[c].add(r)
    pivot_rows: list[int] = []
    pivots: list[int] = []
    used = [False] * len(rows)
    for c in range(ncols):
        cands = [r for r in col_rows.get(c, ()) if not used[r]]
        if not cands:
            continue
        p = min(cands)
        used[p] = True
        prow = rows[p]
        inv = 1 / prow[c]
        if inv != 1:
            for cc in prow:
                prow[cc] *= inv
        for r in list(col_rows[c]):
            if r == p:
                continue
            row = rows[r]
            f = row[c]
            for cc, v in prow.items():
                nv = row.get(cc, 0) - f * v
                if nv:
                    if cc not in row and cc < ncols:
                        col_rows[cc].add(r)
                    row[cc] = nv
                else:
                    row.pop(cc, None)
                    if cc < ncols:
                        col_rows[cc].discard(r)
        pivot_rows.append(p)
        pivots.append(c)
    reduced = [rows[p] for p in pivot_rows]
    leftovers = [(origin[r], rows[r]) for r in range(len(rows)) if not used[r]]
    return reduced, pivots, leftovers


def nullspace(m: RationalMatrix) -> list[list[Fraction]]:
    """Exact kernel basis, one vector per free column (in column order)."""
    reduced, pivots = m.rref()
    pivot_set = set(pivots)
    basis = []
    for f in range(m.ncols):
        if f in pivot_set:
            continue
        vec = [Fraction(0)] * m.ncols
        vec[f] = Fraction(1)
        for row, pc in zip(reduced, pivots):
            v = row.get(f)
            if v:
                vec[pc] = -v
        basis.append(vec)
    return basis


def solve_particular(m: RationalMatrix, rhs: Sequence[object]) -> list[Fraction]:
    """Some exact x with m x = rhs; free variables are set to zero.

    Raises Inconsistent when rhs is not in the column space.
    """
    if len(rhs) != m.nrows:
        raise ValueError(f"rhs has length {len(rhs)}, matrix has {m.nrows} rows")
    aug = m.ncols
    rows = []
    for row, b in zip(m.rows, rhs):
        r = dict(row)
        b = Fraction(b)
        if b:
            r[aug] = b
        rows.append(r)
    reduced, pivots, leftovers = _gauss_jordan(rows, m.ncols)
    bad = [orig for orig, row in leftovers if row.get(aug)]
    if bad:
        raise Inconsistent(f"system is inconsistent ({len(bad)} contradictory rows)", bad)
    x = [Fraction(0)] * m.ncols
    for row, pc in zip(reduced, pivots):
        x[pc] = row.get(aug, Fraction(0))
    return x
