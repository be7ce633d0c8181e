"""Shared test helpers: independent oracles and random-input builders."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from weilgeo.manifold import polynomial_chart
from weilgeo.weil import (
    DInfTrunc,
    Dk,
    DkOfN,
    DOfN,
    InfinitesimalSpec,
    PowerDk,
    ProductDk,
    WeilElement,
)


# -- independent oracle: plain sparse polynomials, no truncation -------------

def poly_mul(a: dict, b: dict) -> dict:
    """Untruncated sparse polynomial product (oracle, no ideal)."""
    out: dict = {}
    for e1, c1 in a.items():
        for e2, c2 in b.items():
            exp = tuple(x + y for x, y in zip(e1, e2))
            out[exp] = out.get(exp, 0) + c1 * c2
    return {e: c for e, c in out.items() if c != 0}


def poly_add(a: dict, b: dict) -> dict:
    out = dict(a)
    for e, c in b.items():
        out[e] = out.get(e, 0) + c
    return {e: c for e, c in out.items() if c != 0}


def reduce_by_total_degree(p: dict, k: int) -> dict:
    """Oracle reduction for the total-degree rule."""
    return {e: c for e, c in p.items() if sum(e) <= k}


# -- random inputs ------------------------------------------------------------

def random_element(spec: InfinitesimalSpec, rng: random.Random,
                    max_terms: int = 4) -> WeilElement:
    monos = list(spec.monomials())
    terms = {}
    for _ in range(rng.randint(1, max_terms)):
        terms[rng.choice(monos)] = Fraction(rng.randint(-9, 9),
                                            rng.randint(1, 5))
    return WeilElement(spec, terms)


def spec_grid(limit: int = 4) -> list[InfinitesimalSpec]:
    out: list[InfinitesimalSpec] = []
    for k in range(1, limit + 1):
        out.append(Dk(k))
    for n in range(2, limit + 1):
        out.append(DOfN(n))
        for k in range(2, limit + 1):
            out.append(DkOfN(k, n))
            out.append(PowerDk(k, n))
    out.append(ProductDk(1, 3))
    out.append(ProductDk(2, 1, 3))
    out.append(DInfTrunc(2, 2))
    out.append(DInfTrunc(3, 3))
    return out


def rational_chart(rng: random.Random, dim: int = 2, degree: int = 1,
                   entries: int | None = None):
    """Chart with Fraction-valued polynomial Christoffel symbols; every
    synthetic computation over it is exact.  ``entries`` caps how many
    (i, j, k) components are populated (None = all), keeping
    high-dimensional runs sparse and fast."""
    triples = [(i, j, k) for i in range(dim) for j in range(dim)
               for k in range(j, dim)]
    if entries is not None:
        triples = rng.sample(triples, min(entries, len(triples)))
    terms = {}
    for triple in triples:
        poly = {}
        for _ in range(degree + 1):
            exp = tuple(rng.randint(0, degree) for _ in range(dim))
            if sum(exp) > degree:
                exp = tuple(0 for _ in range(dim))
            poly[exp] = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        terms[triple] = poly
    return polynomial_chart(dim, terms, name="rational")


@pytest.fixture
def rng() -> random.Random:
    return random.Random(20260809)
