"""Chart-based catalog manifolds with a classical curvature oracle.

Charts carry closed-form metric and Christoffel callables written against
the Weil-capable primitives in :mod:`weilgeo.weil`, so the same source
formula serves float evaluation and exact nilpotent (jet) evaluation.  A
finite-difference variant of any chart drops the closed forms to exercise
the numeric fallback path.

Index convention for the oracle: ``R^i_jkl = d_k Gamma^i_lj - d_l
Gamma^i_kj + Gamma^i_km Gamma^m_lj - Gamma^i_lm Gamma^m_kj``; the lowered
tensor is antisymmetric in its last two indices, which span the loop
plane, while j is the transported-vector slot.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Callable, Sequence

import numpy as np

from .weil import DkOfN, WeilElement, cos, cot, generators, sin

CONVENTION = "R^i_jkl, lowered-index last two antisymmetric"

FD_STEP_FIRST = 1e-5   # central differences, first derivatives
FD_STEP_SECOND = 1e-4  # nested central differences, second derivatives


class ChartDomainError(ValueError):
    """Coordinates outside a chart's valid region (incl. singular loci)."""


class UnknownChartError(ValueError):
    pass


@dataclass(frozen=True)
class Chart:
    """Named coordinate patch with metric and Christoffel data.

    ``metric`` maps coordinates to a dim x dim nested list; ``christoffel``
    (optional) to a dim^3 nested list Gamma[i][j][k] = Gamma^i_jk,
    symmetric in (j, k).  When ``analytic`` is true both callables accept
    WeilElement coordinates, which is how exact partial derivatives are
    obtained; otherwise partials fall back to finite differences.

    This is also the extension point for user-defined geometries: build a
    Chart directly from your own callables.
    """

    name: str
    dim: int
    metric: Callable
    christoffel: Callable | None
    domain: Callable[[Sequence[float]], bool]
    sample_box: tuple[tuple[float, float], ...]
    analytic: bool = True
    params: tuple[tuple[str, float], ...] = ()

    def check_point(self, x: Sequence[float]) -> tuple[float, ...]:
        pt = tuple(float(v) for v in x)
        if len(pt) != self.dim:
            raise ChartDomainError(
                f"chart {self.name} expects {self.dim} coordinates, got {len(pt)}")
        if not self.domain(pt):
            raise ChartDomainError(
                f"point {pt} outside the domain of chart {self.name}")
        return pt

    def metric_at(self, x: Sequence[float]) -> np.ndarray:
        pt = self.check_point(x)
        return np.array(self.metric(list(pt)), dtype=float)

    def describe(self) -> str:
        ps = ", ".join(f"{k}={v}" for k, v in self.params)
        return f"{self.name}({ps})"


def _euclidean(dim: int) -> Chart:
    identity = [[1.0 if i == j else 0.0 for j in range(dim)] for i in range(dim)]
    zero_gamma = [[[0.0] * dim for _ in range(dim)] for _ in range(dim)]
    return Chart(
        name="euclidean",
        dim=dim,
        metric=lambda x: identity,
        christoffel=lambda x: zero_gamma,
        domain=lambda x: True,
        sample_box=tuple((-1.0, 1.0) for _ in range(dim)),
        params=(("dim", dim),),
    )


def _sphere2(radius: float) -> Chart:
    r2 = radius * radius

    def metric(x):
        theta, _ = x
        s = sin(theta)
        return [[r2, 0.0], [0.0, (r2 * s) * s]]

    def christoffel(x):
        theta, _ = x
        s, c = sin(theta), cos(theta)
        ct = cot(theta)
        minus_sc = -(s * c)
        z = 0.0
        return [
            [[z, z], [z, minus_sc]],
            [[z, ct], [ct, z]],
        ]

    return Chart(
        name="sphere2",
        dim=2,
        metric=metric,
        christoffel=christoffel,
        domain=lambda x: 0.0 < x[0] < math.pi,
        sample_box=((0.4, math.pi - 0.4), (0.2, 2 * math.pi - 0.2)),
        params=(("radius", radius),),
    )


def _sphere3(radius: float) -> Chart:
    r2 = radius * radius

    def metric(x):
        chi, theta, _ = x
        sc, st = sin(chi), sin(theta)
        g11 = (r2 * sc) * sc
        return [
            [r2, 0.0, 0.0],
            [0.0, g11, 0.0],
            [0.0, 0.0, (g11 * st) * st],
        ]

    def christoffel(x):
        chi, theta, _ = x
        sc, cc = sin(chi), cos(chi)
        st, ct = sin(theta), cos(theta)
        cot_chi = cot(chi)
        cot_theta = cot(theta)
        z = 0.0
        g = [[[z] * 3 for _ in range(3)] for _ in range(3)]
        g[0][1][1] = -(sc * cc)
        g[0][2][2] = (-(sc * cc) * st) * st
        g[1][0][1] = g[1][1][0] = cot_chi
        g[1][2][2] = -(st * ct)
        g[2][0][2] = g[2][2][0] = cot_chi
        g[2][1][2] = g[2][2][1] = cot_theta
        return g

    return Chart(
        name="sphere3",
        dim=3,
        metric=metric,
        christoffel=christoffel,
        domain=lambda x: (0.0 < x[0] < math.pi and 0.0 < x[1] < math.pi
                          and 0.0 < x[2] < 2 * math.pi),
        sample_box=((0.4, math.pi - 0.4), (0.4, math.pi - 0.4),
                    (0.2, 2 * math.pi - 0.2)),
        params=(("radius", radius),),
    )


def catalog(name: str, *, dim: int | None = None,
            radius: float | None = None) -> Chart:
    """Catalog charts: euclidean(dim), sphere2(radius), sphere3(radius)."""
    if name == "euclidean":
        if dim is None or dim < 1:
            raise ValueError("euclidean needs dim >= 1")
        return _euclidean(dim)
    if name == "sphere2":
        if radius is None or radius <= 0:
            raise ValueError("sphere2 needs radius > 0")
        return _sphere2(float(radius))
    if name == "sphere3":
        if radius is None or radius <= 0:
            raise ValueError("sphere3 needs radius > 0")
        return _sphere3(float(radius))
    raise UnknownChartError(f"unknown chart {name!r}")


def finite_difference_variant(chart: Chart) -> Chart:
    """Same geometry with closed forms hidden: Christoffel symbols come
    from the metric by the Levi-Civita formula and all partials from
    finite differences."""
    return replace(chart, name=chart.name + "_fd", christoffel=None,
                   analytic=False)


# ---------------------------------------------------------------------------
# Levi-Civita connection and the classical oracle
# ---------------------------------------------------------------------------

def _metric_partials(chart: Chart, x: Sequence[float]) -> np.ndarray:
    """dg[m, i, j] = d_m g_ij at x."""
    n = chart.dim
    if chart.analytic:
        spec = DkOfN(1, n)
        gens = generators(spec)
        coords = [xi + g for xi, g in zip(x, gens)]
        entries = chart.metric(coords)
        dg = np.zeros((n, n, n))
        for i in range(n):
            for j in range(n):
                e = entries[i][j]
                if isinstance(e, WeilElement):
                    for m in range(n):
                        alpha = tuple(1 if t == m else 0 for t in range(n))
                        dg[m, i, j] = e.coefficient(alpha)
        return dg
    h = FD_STEP_FIRST
    dg = np.zeros((n, n, n))
    for m in range(n):
        xp, xm = list(x), list(x)
        xp[m] += h
        xm[m] -= h
        gp = np.array(chart.metric(xp), dtype=float)
        gm = np.array(chart.metric(xm), dtype=float)
        dg[m] = (gp - gm) / (2 * h)
    return dg


def christoffel_from_metric(chart: Chart, x: Sequence[float]) -> np.ndarray:
    """Gamma^i_jk = 1/2 g^il (d_j g_lk + d_k g_lj - d_l g_jk)."""
    pt = chart.check_point(x)
    g = np.array(chart.metric(list(pt)), dtype=float)
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as err:
        raise ChartDomainError(f"metric singular at {pt}") from err
    dg = _metric_partials(chart, pt)
    n = chart.dim
    gamma = np.zeros((n, n, n))
    for i in range(n):
        for j in range(n):
            for k in range(n):
                acc = 0.0
                for l in range(n):
                    acc += ginv[i, l] * (dg[j, l, k] + dg[k, l, j] - dg[l, j, k])
                gamma[i, j, k] = 0.5 * acc
    return gamma


def christoffel_at(chart: Chart, x: Sequence[float]) -> np.ndarray:
    """Christoffel symbols as floats: closed form when the chart has one,
    otherwise derived from the metric."""
    pt = chart.check_point(x)
    if chart.christoffel is not None:
        return np.array(chart.christoffel(list(pt)), dtype=float)
    return christoffel_from_metric(chart, pt)


def christoffel_jet(chart: Chart, x: Sequence[float]
                    ) -> tuple[np.ndarray, np.ndarray]:
    """(Gamma, dGamma) at x with dGamma[m, i, j, k] = d_m Gamma^i_jk."""
    pt = chart.check_point(x)
    n = chart.dim
    if chart.analytic and chart.christoffel is not None:
        spec = DkOfN(1, n)
        gens = generators(spec)
        coords = [xi + g for xi, g in zip(pt, gens)]
        entries = chart.christoffel(coords)
        gamma = np.zeros((n, n, n))
        dgamma = np.zeros((n, n, n, n))
        zero_exp = (0,) * n
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    e = entries[i][j][k]
                    if isinstance(e, WeilElement):
                        gamma[i, j, k] = e.coefficient(zero_exp)
                        for m in range(n):
                            alpha = tuple(1 if t == m else 0 for t in range(n))
                            dgamma[m, i, j, k] = e.coefficient(alpha)
                    else:
                        gamma[i, j, k] = e
        return gamma, dgamma
    gamma = christoffel_at(chart, pt)
    h = FD_STEP_SECOND
    dgamma = np.zeros((n, n, n, n))
    for m in range(n):
        xp, xm = list(pt), list(pt)
        xp[m] += h
        xm[m] -= h
        dgamma[m] = (christoffel_at(chart, xp) - christoffel_at(chart, xm)) / (2 * h)
    return gamma, dgamma


@dataclass(frozen=True)
class CurvatureOracleResult:
    """Classical coordinate-formula curvature at one point."""

    point: tuple[float, ...]
    components: np.ndarray          # R^i_jkl, shape (n, n, n, n)
    scalar_curvature: float
    convention: str = CONVENTION

    def lowered(self, metric: np.ndarray) -> np.ndarray:
        return np.einsum("im,mjkl->ijkl", metric, self.components)

    def to_json(self) -> dict:
        return {
            "point": list(self.point),
            "convention": self.convention,
            "components": self.components.reshape(-1).tolist(),
            "shape": list(self.components.shape),
            "scalar_curvature": self.scalar_curvature,
        }


def classical_riemann(chart: Chart, x: Sequence[float]) -> CurvatureOracleResult:
    """R^i_jkl = d_k Gamma^i_lj - d_l Gamma^i_kj
                 + Gamma^i_km Gamma^m_lj - Gamma^i_lm Gamma^m_kj,
    plus the scalar curvature by double metric contraction."""
    pt = chart.check_point(x)
    gamma, dgamma = christoffel_jet(chart, pt)
    n = chart.dim
    riem = (np.einsum("kilj->ijkl", dgamma)
            - np.einsum("likj->ijkl", dgamma)
            + np.einsum("ikm,mlj->ijkl", gamma, gamma)
            - np.einsum("ilm,mkj->ijkl", gamma, gamma))
    g = np.array(chart.metric(list(pt)), dtype=float)
    ginv = np.linalg.inv(g)
    ricci = np.einsum("ijil->jl", riem)
    scalar = float(np.einsum("jl,jl->", ginv, ricci))
    return CurvatureOracleResult(point=pt, components=riem, scalar_curvature=scalar)


def random_interior_point(chart: Chart, rng) -> tuple[float, ...]:
    """Uniform sample from the chart's interior sampling box."""
    return tuple(lo + (hi - lo) * rng.random() for lo, hi in chart.sample_box)


def polynomial_chart(dim: int, gamma_terms: dict, name: str = "polynomial",
                     ) -> Chart:
    """Chart with identity metric and polynomial Christoffel symbols.

    ``gamma_terms`` maps an index triple (i, j, k) with j <= k to a sparse
    polynomial ``exponent-tuple -> coefficient``; the (j, k) symmetric
    partner is filled in.  With Fraction coefficients and Fraction
    coordinates every downstream computation is exact, which is what the
    algebraic-identity tests run on.  Also the template for user-defined
    charts: any Chart built from +, * and the Weil-capable primitives
    supports exact jets.
    """
    table: dict[tuple[int, int, int], dict] = {}
    for (i, j, k), poly in gamma_terms.items():
        if j > k:
            raise ValueError(f"give the symmetric entry as ({i}, {k}, {j})")
        table[(i, j, k)] = dict(poly)

    def christoffel(x):
        out = [[[0] * dim for _ in range(dim)] for _ in range(dim)]
        for (i, j, k), poly in table.items():
            value = 0
            for exp, coeff in poly.items():
                term = coeff
                for xi, ei in zip(x, exp):
                    for _ in range(ei):
                        term = term * xi
                value = value + term
            out[i][j][k] = value
            out[i][k][j] = value
        return out

    identity = [[1 if i == j else 0 for j in range(dim)] for i in range(dim)]
    return Chart(
        name=name,
        dim=dim,
        metric=lambda x: identity,
        christoffel=christoffel,
        domain=lambda x: True,
        sample_box=tuple((-1.0, 1.0) for _ in range(dim)),
        params=(("dim", dim),),
    )
