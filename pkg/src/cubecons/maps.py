"""Built-in closed-form maps and univariate series helpers."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from math import comb
from typing import Mapping

from .exactpoly import Polynomial
from .lattice import SKEW, SYMMETRIC, MapFamily, PointState, family_from_roles

EXACT = "exact"
FLOAT = "float"


class DomainError(ArithmeticError):
    pass


@dataclass(frozen=True)
class ClosedFormMap:
    kind: str

    @property
    def symmetry(self) -> str:
        return SYMMETRIC if self.kind == "darboux" else SKEW


DARBOUX = ClosedFormMap("darboux")
STAR_TRIANGLE = ClosedFormMap("star_triangle")
MAPS = {"darboux": DARBOUX, "star-triangle": STAR_TRIANGLE, "star_triangle": STAR_TRIANGLE}


def _inv_sqrt_one_minus(order: int) -> list[Fraction]:
    """Coefficients of (1 - t)^(-1/2) up to t^order."""
    return [Fraction(comb(2 * n, n), 4**n) for n in range(order + 1)]


def expand_darboux(order: int, n: int = 4) -> MapFamily:
    """Series of (x_ij + x_ik x_jk) / sqrt((1 - x_ik^2)(1 - x_jk^2)) minus x_ij."""
    if order < 2:
        raise ValueError("order must be >= 2")
    s = _inv_sqrt_one_minus(order // 2)
    role_terms: dict[int, list] = {}
    # x_ij * y^(2a) * z^(2b) and y^(2a+1) * z^(2b+1), weights s[a] s[b]
    for a in range(len(s)):
        for b in range(len(s)):
            w = s[a] * s[b]
            d1 = 1 + 2 * a + 2 * b
            if 2 <= d1 <= order:
                role_terms.setdefault(d1, []).append((w, (1, 2 * a, 2 * b)))
            d2 = 2 + 2 * a + 2 * b
            if d2 <= order:
                role_terms.setdefault(d2, []).append((w, (0, 2 * a + 1, 2 * b + 1)))
    return family_from_roles(n, order, role_terms)


def _check_sqrt_arg(v) -> None:
    if not -1 < v < 1:
        raise DomainError(f"|x| = {abs(v)} >= 1 under the square root")


def _exact_sqrt(q: Fraction) -> Fraction:
    num, den = q.numerator, q.denominator
    rn, rd = math.isqrt(num), math.isqrt(den)
    if rn * rn != num or rd * rd != den:
        raise DomainError(f"sqrt({q}) is not rational")
    return Fraction(rn, rd)


def eval_closed_form(cmap: ClosedFormMap, face: tuple[int, int], k: int, state: PointState,
                     mode: str = EXACT, margin: float = 0.0):
    """T_k x_ij for the oriented pair (i, j) at ``state``.

    ``margin`` (float mode) rejects points closer than that to a singular locus.
    """
    i, j = face
    if k in (i, j) or i == j:
        raise ValueError(f"direction {k} must lie outside face ({i}, {j})")
    if mode not in (EXACT, FLOAT):
        raise ValueError(f"unknown mode {mode!r}")
    conv = float if mode == FLOAT else Fraction
    xij, xik, xjk = (conv(state.get(a, b)) for a, b in ((i, j), (i, k), (j, k)))
    if cmap.kind == "darboux":
        for v in (xik, xjk):
            _check_sqrt_arg(v)
            if mode == FLOAT and 1 - abs(v) < margin:
                raise DomainError(f"|x| = {abs(v)} within {margin} of 1")
        num = xij + xik * xjk
        if mode == FLOAT:
            return num / (math.sqrt(1 - xik * xik) * math.sqrt(1 - xjk * xjk))
        return num / (_exact_sqrt(1 - xik * xik) * _exact_sqrt(1 - xjk * xjk))
    if cmap.kind == "star_triangle":
        xki = -xik
        den = xij * xjk + xjk * xki + xki * xij
        if den == 0 or (mode == FLOAT and abs(den) < margin):
            raise DomainError("star-triangle denominator vanishes")
        return -xij / den
    raise ValueError(f"unknown map kind {cmap.kind!r}")


# -- univariate series -----------------------------------------------------


@dataclass(frozen=True)
class UnivariateSeries:
    """f(x) = sum_{d>=1} c_d x^d, truncated at ``order``."""

    coeffs: Mapping[int, Fraction] = field(default_factory=lambda: {1: Fraction(1)})
    order: int = 1

    def __post_init__(self):
        clean = {}
        for d, c in sorted(self.coeffs.items()):
            if d < 1:
                raise ValueError("univariate series must vanish at 0")
            c = Fraction(c)
            if c and d <= self.order:
                clean[d] = c
        object.__setattr__(self, "coeffs", clean)

    def __getitem__(self, d: int) -> Fraction:
        return self.coeffs.get(d, Fraction(0))

    @property
    def linear(self) -> Fraction:
        return self[1]

    @classmethod
    def identity(cls, order: int) -> "UnivariateSeries":
        return cls({1: Fraction(1)}, order)

    @classmethod
    def mobius(cls, lam, order: int) -> "UnivariateSeries":
        """x / (1 - lam x) = sum lam^(d-1) x^d."""
        lam = Fraction(lam)
        return cls({d: lam ** (d - 1) for d in range(1, order + 1)}, order)

    def truncated(self, order: int) -> "UnivariateSeries":
        return UnivariateSeries(self.coeffs, order)

    def to_polynomial(self, var: int) -> Polynomial:
        out = Polynomial.zero()
        for d, c in self.coeffs.items():
            out = out + Polynomial.var(var, c, d)
        return out

    def __call__(self, t):
        return sum(c * t**d for d, c in self.coeffs.items())


def _series_mul(a: list[Fraction], b: list[Fraction], order: int) -> list[Fraction]:
    out = [Fraction(0)] * (order + 1)
    for i, ca in enumerate(a):
        if not ca:
            continue
        for j in range(0, order + 1 - i):
            if j < len(b) and b[j]:
                out[i + j] += ca * b[j]
    return out


def univariate_compose(f: UnivariateSeries, g: UnivariateSeries, order: int) -> UnivariateSeries:
    """(f o g)(x) = f(g(x)) truncated at ``order``."""
    gl = [Fraction(0)] * (order + 1)
    for d, c in g.coeffs.items():
        if d <= order:
            gl[d] = c
    out = [Fraction(0)] * (order + 1)
    power = [Fraction(1)] + [Fraction(0)] * order
    for d in range(1, order + 1):
        power = _series_mul(power, gl, order)
        c = f[d]
        if c:
            for e in range(order + 1):
                out[e] += c * power[e]
    return UnivariateSeries({d: out[d] for d in range(1, order + 1)}, order)


def revert(f: UnivariateSeries, order: int) -> UnivariateSeries:
    """Compositional inverse g with f(g(x)) = x + O(x^(order+1))."""
    c1 = f.linear
    if not c1:
        raise ZeroDivisionError("series with zero linear term is not invertible")
    g = UnivariateSeries({1: 1 / c1}, order)
    for d in range(2, order + 1):
        # the degree-d coefficient of f(g) is c1 * g_d + (terms in g_<d)
        err = univariate_compose(f, g, d)[d]
        coeffs = dict(g.coeffs)
        coeffs[d] = -err / c1
        g = UnivariateSeries(coeffs, order)
    return g
