"""Invariant suites runnable from the CLI/service, independent of pytest.

Each suite draws seeded-random cases, so runs are deterministic.  A suite
returns its case count and the names of failed properties; the runner
aggregates.  ``connection_factory`` is a test hook: substituting a
deliberately broken connection must make the sdg suite fail.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

import numpy as np

from . import hybrid, manifold, sdg, weil
from .manifold import catalog, classical_riemann, polynomial_chart
from .sdg import (
    SyntheticConnection,
    TangentVector,
    k_map,
    microlinearity_checks,
    nabla,
    riemann_synthetic,
    transport_p,
    transport_q,
)
from .weil import (
    DInfTrunc,
    Dk,
    DkOfN,
    DOfN,
    PowerDk,
    ProductDk,
    WeilElement,
    augmentation,
    generator,
    generators,
    is_infinitesimal,
    kl_extract,
    evaluate_coefficients,
    nilpotency_order,
    spec_contains,
)

SEED = 0x5D6

ConnectionFactory = Callable[[manifold.Chart], SyntheticConnection]


@dataclass
class SuiteResult:
    name: str
    cases: int
    failures: list[str]

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> dict:
        return {"name": self.name, "cases": self.cases,
                "failures": self.failures, "passed": self.passed}


def random_element(spec, rng: random.Random, max_terms: int = 4) -> WeilElement:
    terms = {}
    monos = list(spec.monomials())
    for _ in range(rng.randint(1, max_terms)):
        exp = rng.choice(monos)
        terms[exp] = Fraction(rng.randint(-6, 6), rng.randint(1, 4))
    return WeilElement(spec, terms)


def sample_specs(limit: int = 4) -> list:
    out = []
    for k in range(1, limit + 1):
        out.append(Dk(k))
    for n in range(2, limit + 1):
        out.append(DOfN(n))
    for k in range(2, limit + 1):
        for n in range(2, limit + 1):
            out.append(DkOfN(k, n))
            out.append(PowerDk(k, n))
    out.append(ProductDk(1, 2))
    out.append(ProductDk(2, 3, 1))
    out.append(DInfTrunc(2, 2))
    out.append(DInfTrunc(3, 2))
    return out


def suite_weil(cases_per_spec: int = 40) -> SuiteResult:
    rng = random.Random(SEED)
    failures: list[str] = []
    cases = 0
    specs = sample_specs(3)
    for spec in specs:
        for _ in range(cases_per_spec):
            cases += 1
            a = random_element(spec, rng)
            b = random_element(spec, rng)
            c = random_element(spec, rng)
            if (a + b) + c != a + (b + c) or (a * b) * c != a * (b * c):
                failures.append(f"associativity in {spec}")
            if a * b != b * a or a + b != b + a:
                failures.append(f"commutativity in {spec}")
            if a * (b + c) != a * b + a * c:
                failures.append(f"distributivity in {spec}")
            if a * weil.one(spec) != a or a + weil.zero(spec) != a:
                failures.append(f"units in {spec}")
            if augmentation(a * b) != augmentation(a) * augmentation(b):
                failures.append(f"augmentation not multiplicative in {spec}")
            if augmentation(a + b) != augmentation(a) + augmentation(b):
                failures.append(f"augmentation not additive in {spec}")
        for i in range(1, spec.generators + 1):
            cases += 1
            g = generator(spec, i)
            expect = _generator_order(spec, i)
            if nilpotency_order(g) != expect:
                failures.append(f"generator nilpotency in {spec}")
    # containment chain D_k(n) <= (D_k)^n <= D_nk(n), strict ladder in k
    for n in (2, 3):
        for k in (1, 2, 3):
            cases += 1
            bound = n * k + 2
            if not spec_contains(DkOfN(k, n), PowerDk(k, n), bound):
                failures.append(f"D_{k}({n}) not inside (D_{k})^{n}")
            if not spec_contains(PowerDk(k, n), DkOfN(n * k, n), bound):
                failures.append(f"(D_{k})^{n} not inside D_{n*k}({n})")
    # coefficient-extraction round trips
    for spec in (Dk(2), DOfN(2), DkOfN(2, 2)):
        for _ in range(20):
            cases += 1
            a = random_element(spec, rng)
            if evaluate_coefficients(spec, kl_extract(a)) != a:
                failures.append(f"extraction round trip in {spec}")
    return SuiteResult("weil", cases, sorted(set(failures)))


def _generator_order(spec, i: int) -> int:
    kind = spec.kind
    if kind == "Dk":
        return spec.order + 1
    if kind == "DOfN":
        return 2
    if kind in ("DkOfN", "DInfTrunc"):
        return spec.order + 1
    if kind == "PowerDk":
        return spec.order + 1
    if kind == "ProductDk":
        return spec.orders[i - 1] + 1
    raise ValueError(kind)


def suite_manifold(points_per_chart: int = 4) -> SuiteResult:
    rng = random.Random(SEED + 1)
    failures: list[str] = []
    cases = 0
    charts = [catalog("euclidean", dim=3), catalog("sphere2", radius=1.0),
              catalog("sphere3", radius=2.0)]
    for chart in charts:
        scalars = []
        for _ in range(points_per_chart):
            cases += 1
            x = manifold.random_interior_point(chart, rng)
            res = classical_riemann(chart, x)
            riem = res.components
            if np.max(np.abs(riem + np.einsum("ijlk->ijkl", riem))) > 1e-8:
                failures.append(f"antisymmetry k<->l on {chart.name}")
            bianchi = (riem + np.einsum("iklj->ijkl", riem)
                       + np.einsum("iljk->ijkl", riem))
            if np.max(np.abs(bianchi)) > 1e-8:
                failures.append(f"first Bianchi on {chart.name}")
            scalars.append(res.scalar_curvature)
        spread = max(scalars) - min(scalars)
        if spread > 1e-8 * max(1.0, abs(scalars[0])):
            failures.append(f"scalar curvature not constant on {chart.name}")
    cases += 1
    s3 = classical_riemann(catalog("sphere3", radius=2.0),
                           (1.2, 1.3, 2.0)).scalar_curvature
    if abs(s3 - 1.5) > 1e-8:
        failures.append("sphere3 scalar curvature != 6/rho^2")
    return SuiteResult("manifold", cases, sorted(set(failures)))


def _rational_chart(rng: random.Random, dim: int = 2) -> manifold.Chart:
    terms = {}
    for i in range(dim):
        for j in range(dim):
            for k in range(j, dim):
                poly = {}
                for _ in range(2):
                    exp = tuple(rng.randint(0, 1) for _ in range(dim))
                    poly[exp] = Fraction(rng.randint(-3, 3), rng.randint(1, 3))
                terms[(i, j, k)] = poly
    return polynomial_chart(dim, terms, name="rational")


def suite_sdg(connection_factory: ConnectionFactory | None = None,
              loops_per_chart: int = 8) -> SuiteResult:
    rng = random.Random(SEED + 2)
    make = connection_factory or SyntheticConnection
    failures: list[str] = []
    cases = 0

    # section property and exact linearity on an exact-arithmetic chart
    chart = _rational_chart(rng)
    conn = make(chart)
    for _ in range(20):
        cases += 1
        base = tuple(Fraction(rng.randint(-2, 2), 2) for _ in range(chart.dim))
        t1 = TangentVector(chart, base,
                           tuple(Fraction(rng.randint(-3, 3)) for _ in range(chart.dim)))
        t2 = TangentVector(chart, base,
                           tuple(Fraction(rng.randint(-3, 3)) for _ in range(chart.dim)))
        square = nabla(conn, t1, t2)
        r1, r2 = k_map(square)
        if r1 != t1 or r2 != t2:
            failures.append("k_map after nabla is not the identity")
        alpha = Fraction(rng.randint(-4, 4), rng.randint(1, 3))
        d1, d2 = generators(sdg.D_SQUARE)
        scaled1 = nabla(conn, TangentVector(chart, base,
                                            tuple(alpha * v for v in t1.vel)), t2)
        if any(sdg._first_slot(scaled1, d1).vel[i]
               != (square.b[i] + (square.c[i] * alpha) * d1)
               for i in range(chart.dim)):
            failures.append("scaling t1 differs from substituting alpha*d1")
        scaled2 = nabla(conn, t1, TangentVector(chart, base,
                                                tuple(alpha * v for v in t2.vel)))
        if any(scaled2.c[i] != alpha * square.c[i] for i in range(chart.dim)):
            failures.append("scaling t2 differs from substituting alpha*d2")
        if any(square.a[i] != t1.vel[i] or square.b[i] != t2.vel[i]
               for i in range(chart.dim)):
            failures.append("edge restrictions of nabla differ from inputs")

    # p/q inverse isomorphisms, exact, on sphere2 fibers
    sphere = catalog("sphere2", radius=1.0)
    sconn = make(sphere)
    ed_spec = PowerDk(1, 2)
    e = generator(ed_spec, 1)
    for _ in range(20):
        cases += 1
        x = manifold.random_interior_point(sphere, rng)
        t = TangentVector(sphere, x, (rng.uniform(-2, 2), rng.uniform(-2, 2)))
        v = TangentVector(sphere, x, (rng.uniform(-2, 2), rng.uniform(-2, 2)))
        back = transport_q(sconn, t, e, transport_p(sconn, t, e, v))
        if any(back.vel[i] != v.vel[i] for i in range(2)):
            failures.append("q(t,e) after p(t,e) is not the identity")

    # holonomy structure + oracle equivalence on catalog charts
    for chart in (catalog("euclidean", dim=3), catalog("sphere2", radius=1.0),
                  catalog("sphere3", radius=1.0)):
        conn = make(chart)
        n = chart.dim
        for _ in range(loops_per_chart):
            cases += 1
            x = manifold.random_interior_point(chart, rng)
            vecs = [tuple(rng.uniform(-1.5, 1.5) for _ in range(n))
                    for _ in range(3)]
            t1, t2, t3 = (TangentVector(chart, x, v) for v in vecs)
            try:
                syn = riemann_synthetic(conn, t1, t2, t3)
            except sdg.ExtractionError:
                failures.append(
                    f"lower-order holonomy coefficients nonzero on {chart.name}")
                continue
            cla = sdg.classical_loop_value(chart, x, *vecs)
            scale = max(float(np.max(np.abs(cla))), 1e-12)
            err = max(abs(float(s) - c) for s, c in zip(syn.vel, cla)) / scale
            if err > 1e-6:
                failures.append(f"oracle equivalence fails on {chart.name}")
            anti = riemann_synthetic(conn, t2, t1, t3)
            if any(abs(float(p) + float(q)) > 1e-10
                   for p, q in zip(syn.vel, anti.vel)):
                failures.append(f"antisymmetry in (t1, t2) fails on {chart.name}")
    return SuiteResult("sdg", cases, sorted(set(failures)))


def suite_hybrid() -> SuiteResult:
    failures: list[str] = []
    cases = 0
    cfg = hybrid.HybridConfig(h=0.5, tau_min=-2.0, tau_max=2.0, steps=9)
    result = hybrid.simulate(cfg)
    cases += 1
    regimes = [s.regime for s in result.states]
    if regimes != ["SET"] * 3 + ["G"] * 3 + ["SET"] * 3:
        failures.append("reference run regime sequence wrong")
    cases += 1
    if result.guarded_divisions != 0:
        failures.append("division attempted at rho <= h")
    cases += 1
    for s in result.states:
        if (s.regime == "G") != (s.rho <= cfg.h):
            failures.append("regime partition violated")
        if s.regime == "G" and not is_infinitesimal(s.curvature_weil):
            failures.append("G-regime curvature not infinitesimal")
        if s.regime == "SET" and s.curvature_scalar is None:
            failures.append("SET sample missing scalar curvature")
    cases += 1
    set_down = [s.curvature_scalar for s in result.states
                if s.regime == "SET" and s.tau > 0]
    if sorted(set_down, reverse=True) != set_down:
        failures.append("SET curvature not increasing toward the threshold")
    cases += 1
    atlas = result.atlas
    if (len(atlas.patches) != 2 or atlas.single_global_chart
            or not atlas.exotic_marker
            or not atlas.overlap[0] < atlas.overlap[1]):
        failures.append("atlas report malformed")
    return SuiteResult("hybrid", cases, sorted(set(failures)))


def suite_microlinearity() -> SuiteResult:
    report = microlinearity_checks()
    failures = [c.name for c in report.checks if not c.passed]
    return SuiteResult("microlinearity", len(report.checks), failures)


SUITES: dict[str, Callable[..., SuiteResult]] = {
    "weil": suite_weil,
    "manifold": suite_manifold,
    "sdg": suite_sdg,
    "hybrid": suite_hybrid,
    "microlinearity": suite_microlinearity,
}


def run_selftest(suites: Sequence[str] | None = None,
                 connection_factory: ConnectionFactory | None = None
                 ) -> list[SuiteResult]:
    names = list(suites) if suites else list(SUITES)
    unknown = [n for n in names if n not in SUITES]
    if unknown:
        raise ValueError(f"unknown suites {unknown}; known: {sorted(SUITES)}")
    results = []
    for name in names:
        runner = SUITES[name]
        if name == "sdg":
            results.append(runner(connection_factory=connection_factory))
        else:
            results.append(runner())
    return results
