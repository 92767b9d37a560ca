import random
from fractions import Fraction

import pytest
from hypothesis import strategies as st

from cubecons.exactpoly import Monomial, Polynomial
from cubecons.lattice import enumerate_faces

VARS = (0, 1, 2, 3)

small_q = st.builds(Fraction, st.integers(-6, 6), st.integers(1, 5))
nonzero_q = small_q.filter(bool)


@st.composite
def monomials(draw, variables=VARS, max_exp=3):
    return Monomial({v: draw(st.integers(0, max_exp)) for v in variables})


@st.composite
def polys(draw, variables=VARS, max_terms=5, max_exp=3):
    n = draw(st.integers(0, max_terms))
    terms = {}
    for _ in range(n):
        m = draw(monomials(variables, max_exp))
        terms[m] = terms.get(m, Fraction(0)) + draw(small_q)
    return Polynomial(terms)


def rand_q(rng: random.Random, nonzero: bool = False) -> Fraction:
    while True:
        q = Fraction(rng.randint(-9, 9), rng.randint(1, 9))
        if q or not nonzero:
            return q


@pytest.fixture
def faces4():
    return enumerate_faces(4)


def random_family(rng: random.Random, n: int = 4, order: int = 4, terms: int = 3, symmetry: str = "symmetric"):
    """Family with a few random role monomials per component and degree."""
    from cubecons.exactpoly import monomials_of_degree
    from cubecons.lattice import MapFamily, SeriesComponent, admissible_pairs, roles

    comps = {}
    for face, k in admissible_pairs(n):
        tbd = {}
        for m in range(2, order + 1):
            pool = monomials_of_degree(list(roles(face, k)), m)
            tbd[m] = Polynomial({rng.choice(pool): rand_q(rng) for _ in range(rng.randint(0, terms))})
        comps[(face, k)] = SeriesComponent(face, k, tbd)
    return MapFamily(n, order, comps, symmetry)


@st.composite
def families(draw, n=4, max_order=4):
    seed = draw(st.integers(0, 2**32 - 1))
    order = draw(st.integers(2, max_order))
    sym = draw(st.sampled_from(["symmetric", "skew"]))
    return random_family(random.Random(seed), n, order, 2, sym)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep
