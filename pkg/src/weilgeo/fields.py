"""Smooth scalar fields with partial-derivative (jet) access.

A field provides ``jet(x, order)``: Taylor coefficients
``alpha -> d^alpha f(x) / alpha!`` for all multi-indices with
``|alpha| <= order``.  Three sources are supported:

* exact polynomial coefficients,
* an arbitrary callable built from Weil-capable primitives, differentiated
  by evaluating it once on nilpotent generators,
* a float-only callable, differentiated by central finite differences.
"""

from __future__ import annotations

import math
from typing import Callable, Mapping, Sequence

from .weil import (
    DkOfN,
    ExpVec,
    Scalar,
    WeilElement,
    generators,
    iter_exponents,
)


class ScalarField:
    """Base: a callable f with Taylor-coefficient access.

    ``available_order`` is the highest derivative order the field can
    supply (None = any); ``useful_order`` is an exactness cap, an order
    beyond which every Taylor coefficient is known to be zero (None =
    no such cap).
    """

    arity: int
    available_order: int | None = None
    useful_order: int | None = None

    def __call__(self, x: Sequence[Scalar]) -> Scalar:
        raise NotImplementedError

    def jet(self, x: Sequence[Scalar], order: int) -> dict[ExpVec, Scalar]:
        raise NotImplementedError


class PolynomialField(ScalarField):
    """Exact polynomial in n variables; jets by binomial shift, exact for
    int/Fraction coefficients."""

    def __init__(self, arity: int, coefficients: Mapping[ExpVec, Scalar]):
        self.arity = arity
        self.coefficients = {tuple(e): c for e, c in coefficients.items() if c != 0}
        self.useful_order = max((sum(e) for e in self.coefficients), default=0)

    def __call__(self, x: Sequence[Scalar]) -> Scalar:
        total: Scalar = 0
        for exp, coeff in self.coefficients.items():
            term = coeff
            for xi, ei in zip(x, exp):
                for _ in range(ei):
                    term = term * xi
            total = total + term
        return total

    def jet(self, x: Sequence[Scalar], order: int) -> dict[ExpVec, Scalar]:
        out: dict[ExpVec, Scalar] = {}
        for alpha in iter_exponents(self.arity, min(order, self.useful_order)):
            total: Scalar = 0
            for exp, coeff in self.coefficients.items():
                if any(a > e for a, e in zip(alpha, exp)):
                    continue
                term = coeff
                for xi, ei, ai in zip(x, exp, alpha):
                    term = term * math.comb(ei, ai)
                    for _ in range(ei - ai):
                        term = term * xi
                total = total + term
            if total != 0:
                out[tuple(alpha)] = total
        return out


class JetField(ScalarField):
    """Field defined by a callable built from Weil-capable primitives.

    All partial derivatives at a point come from one evaluation of the
    callable on ``x + nilpotent generators``: the reduced result's
    coefficients *are* the Taylor coefficients, exactly (up to float
    roundoff of the primitives themselves).
    """

    def __init__(self, arity: int, fn: Callable):
        self.arity = arity
        self.fn = fn

    def __call__(self, x: Sequence[Scalar]) -> Scalar:
        return self.fn(list(x))

    def jet(self, x: Sequence[Scalar], order: int) -> dict[ExpVec, Scalar]:
        if order == 0:
            return {(0,) * self.arity: self.fn(list(x))}
        spec = DkOfN(order, self.arity)
        gens = generators(spec)
        shifted = [xi + g for xi, g in zip(x, gens)]
        value = self.fn(shifted)
        if not isinstance(value, WeilElement):
            return {(0,) * self.arity: value}
        return dict(value.terms)


class FiniteDifferenceField(ScalarField):
    """Float-only callable, differentiated by central differences.

    First derivatives use ``step``; second derivatives use nested central
    differences with the coarser ``step2`` to balance truncation against
    roundoff.  Orders above 2 are not available.
    """

    available_order = 2

    def __init__(self, arity: int, fn: Callable,
                 step: float = 1e-5, step2: float = 1e-4):
        self.arity = arity
        self.fn = fn
        self.step = step
        self.step2 = step2

    def __call__(self, x: Sequence[Scalar]) -> float:
        return self.fn(list(x))

    def _shift(self, x, moves: dict[int, float]) -> float:
        pt = list(x)
        for i, d in moves.items():
            pt[i] = pt[i] + d
        return self.fn(pt)

    def jet(self, x: Sequence[Scalar], order: int) -> dict[ExpVec, Scalar]:
        if order > 2:
            raise ValueError("finite differences provide at most order 2")
        n = self.arity
        x = [float(v) for v in x]
        out: dict[ExpVec, Scalar] = {(0,) * n: self.fn(list(x))}
        if order >= 1:
            h = self.step
            for i in range(n):
                d = (self._shift(x, {i: h}) - self._shift(x, {i: -h})) / (2 * h)
                alpha = tuple(1 if j == i else 0 for j in range(n))
                out[alpha] = d
        if order >= 2:
            h = self.step2
            f0 = out[(0,) * n]
            for i in range(n):
                dii = (self._shift(x, {i: h}) - 2 * f0 + self._shift(x, {i: -h})) / (h * h)
                alpha = tuple(2 if j == i else 0 for j in range(n))
                out[alpha] = dii / 2  # Taylor coefficient: d^2/2!
                for j in range(i + 1, n):
                    dij = (self._shift(x, {i: h, j: h})
                           - self._shift(x, {i: h, j: -h})
                           - self._shift(x, {i: -h, j: h})
                           + self._shift(x, {i: -h, j: -h})) / (4 * h * h)
                    alpha = tuple(1 if m in (i, j) else 0 for m in range(n))
                    out[alpha] = dij
        return {a: c for a, c in out.items() if c != 0}


def polynomial_from_terms(arity: int,
                          terms: Mapping[ExpVec, Scalar]) -> PolynomialField:
    return PolynomialField(arity, terms)
