"""Synthetic geometry layer: jets, connection, infinitesimal transport,
loop holonomy and curvature extraction.

A tangent vector is a first-order jet d -> x + d*v; a microsquare is a
mixed second-order jet (d1, d2) -> x + a d1 + b d2 + c d1 d2.  Transport
happens inside the working nilpotent algebra R[d1,d2]/(d1^2, d2^2): the
defect of transporting a vector around the four edges of an infinitesimal
square lives entirely in the d1*d2 slot, and its coefficient is the
curvature.

When base points and velocities are themselves Weil-valued, the working
algebra is the tensor product of their algebra with R[d1,d2]/(d1^2,d2^2)
and the extracted coefficients are elements of the point algebra.

Numerical discipline: all Christoffel contractions in this module run
through one helper with a fixed association and summation order, so the
cancellations that make lower-order loop coefficients vanish happen
between bit-identical float products and are exact even in float mode.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import weil
from .manifold import (
    CONVENTION,
    Chart,
    christoffel_at,
    classical_riemann,
    FD_STEP_SECOND,
)
from .weil import (
    DEFAULT_TOLERANCE,
    DOfN,
    Dk,
    InfinitesimalSpec,
    PowerDk,
    SpecMismatchError,
    WeilElement,
    embed,
    generator,
    is_infinitesimal,
    slot_coefficient,
    tensor,
)

#: Algebra of one infinitesimal square: two generators, both squaring to zero.
D_SQUARE = PowerDk(1, 2)

#: Overall sign relating the loop defect to the classical oracle
#: contraction (t3 in the vector slot, t1/t2 spanning the plane); pinned
#: once on sphere2 and asserted on every catalog chart by the test suite.
LOOP_ORACLE_SIGN = -1.0


class BaseMismatchError(ValueError):
    """Vectors that must share a base point do not."""


class ExtractionError(ValueError):
    """Nonzero lower-order loop coefficient: a transport fault."""


# ---------------------------------------------------------------------------
# Jets
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TangentVector:
    """First-order jet d -> base + d*vel in a chart.

    Components may be scalars or WeilElements (transport outputs are
    Weil-valued).
    """

    chart: Chart | None
    base: tuple
    vel: tuple

    def __post_init__(self):
        if len(self.base) != len(self.vel):
            raise ValueError("base and velocity dimensions differ")

    @property
    def dim(self) -> int:
        return len(self.base)

    def at(self, d) -> tuple:
        """Evaluate the jet: base + d*vel."""
        return tuple(b + v * d for b, v in zip(self.base, self.vel))


@dataclass(frozen=True)
class Microsquare:
    """Mixed second-order jet (d1, d2) -> base + a d1 + b d2 + c d1 d2."""

    chart: Chart | None
    base: tuple
    a: tuple
    b: tuple
    c: tuple

    @property
    def dim(self) -> int:
        return len(self.base)

    def at(self, d1, d2) -> tuple:
        return tuple(x + ai * d1 + bi * d2 + ci * (d1 * d2)
                     for x, ai, bi, ci in zip(self.base, self.a, self.b, self.c))


@dataclass(frozen=True)
class InfinitesimalTwoChain:
    """A microsquare lifted into the working algebra, with the two formal
    square-zero generators marking its sides; their product is the
    extraction slot."""

    square: Microsquare                 # lifted components
    d1: WeilElement
    d2: WeilElement
    working_spec: InfinitesimalSpec
    point_spec: InfinitesimalSpec | None
    d_positions: tuple[int, int]
    source: Microsquare                 # original, pre-lift


@dataclass(frozen=True)
class SyntheticConnection:
    """Linear section of the microsquare-to-tangent-pair restriction,
    determined by a chart's Christoffel data (or by an explicit override,
    the hook for user-supplied connections)."""

    chart: Chart
    gamma_override: object = None       # callable(coords) -> dim^3 nested list
    _jet_cache: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def dim(self) -> int:
        return self.chart.dim

    def gamma_at(self, base: Sequence) -> list:
        """Christoffel values at a (possibly Weil-valued) base point, as a
        dim^3 nested list of scalars or working-algebra elements."""
        weil_mode = any(isinstance(b, WeilElement) for b in base)
        if self.gamma_override is not None:
            return self.gamma_override(list(base))
        chart = self.chart
        if not weil_mode:
            chart.check_point(base)
            if chart.christoffel is not None:
                return chart.christoffel(list(base))
            return christoffel_at(chart, base).tolist()
        if chart.analytic and chart.christoffel is not None:
            aug = tuple(b.augmentation() if isinstance(b, WeilElement) else b
                        for b in base)
            chart.check_point(aug)
            return chart.christoffel(list(base))
        return self._gamma_fd_weil(base)

    def _gamma_fd_weil(self, base: Sequence) -> list:
        """Assemble Gamma at a Weil-valued point from a finite-difference
        jet table around the augmentation point (order 2)."""
        n = self.dim
        aug = tuple(float(b.augmentation()) if isinstance(b, WeilElement) else float(b)
                    for b in base)
        table = self._jet_cache.get(aug)
        if table is None:
            table = _fd_gamma_table(self.chart, aug)
            self._jet_cache[aug] = table
        eps = [b - a if isinstance(b, WeilElement) else 0.0
               for b, a in zip(base, aug)]
        spec = None
        for e in eps:
            if isinstance(e, WeilElement):
                spec = e.spec
                break
        powers: dict[tuple, WeilElement] = {}
        for alpha in table:
            if sum(alpha) == 0:
                continue
            p = weil.one(spec)
            for i, ai in enumerate(alpha):
                for _ in range(ai):
                    p = p * eps[i]
            powers[alpha] = p
        # the table is blind beyond order 2: refuse displacements whose
        # third-order products survive instead of silently truncating
        for alpha, p in powers.items():
            if sum(alpha) == 2 and not p.is_zero():
                for e in eps:
                    if isinstance(e, WeilElement) and not (p * e).is_zero():
                        raise weil.MissingDerivativeError(
                            "finite-difference Christoffel data provides "
                            "partial derivatives up to order 2 only")
        out = [[[None] * n for _ in range(n)] for _ in range(n)]
        for i in range(n):
            for j in range(n):
                for k in range(n):
                    acc = table[(0,) * n][i, j, k]
                    for alpha, p in powers.items():
                        coeff = table[alpha][i, j, k]
                        if coeff != 0.0 and not p.is_zero():
                            acc = acc + p * coeff
                    out[i][j][k] = acc
        return out


def _fd_gamma_table(chart: Chart, x: tuple) -> dict:
    """Taylor-coefficient table alpha -> array of d^alpha Gamma / alpha!
    up to order 2, by central finite differences."""
    n = chart.dim
    h = FD_STEP_SECOND

    def gam(pt):
        return christoffel_at(chart, list(pt))

    table: dict[tuple, np.ndarray] = {}
    g0 = gam(x)
    table[(0,) * n] = g0

    def shifted(moves: dict[int, float]):
        pt = list(x)
        for i, d in moves.items():
            pt[i] += d
        return gam(pt)

    for i in range(n):
        gp, gm = shifted({i: h}), shifted({i: -h})
        alpha = tuple(1 if t == i else 0 for t in range(n))
        table[alpha] = (gp - gm) / (2 * h)
        alpha2 = tuple(2 if t == i else 0 for t in range(n))
        table[alpha2] = (gp - 2 * g0 + gm) / (2 * h * h)  # includes 1/2!
        for j in range(i + 1, n):
            gij = (shifted({i: h, j: h}) - shifted({i: h, j: -h})
                   - shifted({i: -h, j: h}) + shifted({i: -h, j: -h})) / (4 * h * h)
            alpha = tuple(1 if t in (i, j) else 0 for t in range(n))
            table[alpha] = gij
    return table


# ---------------------------------------------------------------------------
# Connection and transports
# ---------------------------------------------------------------------------

def _values_match(p, q, tol: float = 1e-9) -> bool:
    if isinstance(p, WeilElement) or isinstance(q, WeilElement):
        if not isinstance(p, WeilElement):
            p, q = q, p
        try:
            return p == q or p.close_to(q, tol)
        except SpecMismatchError:
            return False
    if p == q:
        return True
    try:
        return abs(p - q) <= tol * max(1.0, abs(p), abs(q))
    except TypeError:
        return False


def _require_same_base(t1, t2) -> None:
    if len(t1.base) != len(t2.base) or not all(
            _values_match(p, q) for p, q in zip(t1.base, t2.base)):
        raise BaseMismatchError(
            f"base points differ: {t1.base} vs {t2.base}")


def _contract_gamma(gamma: list, u: Sequence, v: Sequence) -> list:
    """-Gamma^i_jk u^j v^k with a fixed association ((g*u)*v) and a fixed
    (j, k) summation order, so repeated evaluations cancel bitwise."""
    n = len(u)
    out = []
    for i in range(n):
        acc = None
        for j in range(n):
            gij = gamma[i][j]
            uj = u[j]
            for k in range(n):
                g = gij[k]
                if isinstance(g, (int, float)) and g == 0:
                    continue
                term = (g * uj) * v[k]
                acc = term if acc is None else acc + term
        out.append(0 if acc is None else -acc)
    return out


def k_map(square: Microsquare) -> tuple[TangentVector, TangentVector]:
    """Restrict a microsquare to its two edge jets through the origin,
    discarding the mixed coefficient.  Left inverse of :func:`nabla`."""
    return (TangentVector(square.chart, square.base, square.a),
            TangentVector(square.chart, square.base, square.b))


def nabla(conn: SyntheticConnection, t1: TangentVector,
          t2: TangentVector) -> Microsquare:
    """The connection's microsquare over a tangent pair: edges are t1 and
    t2, mixed coefficient c^i = -Gamma^i_jk(x) t1^j t2^k.

    Holds by construction: restricting the first (second) slot returns t1
    (t2), and scaling t1 by alpha equals substituting alpha*d1 (same for
    t2 / d2).
    """
    _require_same_base(t1, t2)
    gamma = conn.gamma_at(t1.base)
    c = _contract_gamma(gamma, t1.vel, t2.vel)
    return Microsquare(chart=conn.chart, base=tuple(t1.base),
                       a=tuple(t1.vel), b=tuple(t2.vel), c=tuple(c))


def _first_slot(square: Microsquare, d) -> TangentVector:
    """Evaluate the first slot at d: the tangent vector
    d2 -> square(d, d2), with base square(d, 0) and velocity b + c*d."""
    base = tuple(x + a * d for x, a in zip(square.base, square.a))
    vel = tuple(b + c * d for b, c in zip(square.b, square.c))
    return TangentVector(square.chart, base, vel)


def transport_r(conn: SyntheticConnection, t: TangentVector,
                v: TangentVector, d) -> TangentVector:
    """Transport v along t for an infinitesimal parameter d: the jet
    nabla(t, v)(d, .), i.e. base x + d*t.vel and components
    v^i - d Gamma^i_jk(x) t^j v^k.  d = 0 returns v unchanged."""
    _require_same_base(t, v)
    if not isinstance(d, WeilElement):
        if d == 0:
            return v
        raise weil.NotInfinitesimalError(
            f"transport parameter must be an infinitesimal element, got {d!r}")
    if not is_infinitesimal(d):
        raise weil.NotInfinitesimalError(
            f"transport parameter has augmentation {d.augmentation()}")
    return _first_slot(nabla(conn, t, v), d)


def transport_p(conn: SyntheticConnection, t: TangentVector, e,
                v: TangentVector) -> TangentVector:
    """Fiber map at parameter e: nabla(t, v)(e, .).  Inverse of
    :func:`transport_q` with the same (t, e), exactly, by nilpotency."""
    return transport_r(conn, t, v, e)


def transport_q(conn: SyntheticConnection, t: TangentVector, e,
                v1: TangentVector) -> TangentVector:
    """Inverse fiber map: nabla(nabla(t, t)(e, .), v1)(-e, .), taking a
    vector at t(e) back to the fiber over t(0)."""
    if not isinstance(e, WeilElement):
        if e == 0:
            return v1
        raise weil.NotInfinitesimalError(
            f"transport parameter must be an infinitesimal element, got {e!r}")
    t_prime = _first_slot(nabla(conn, t, t), e)
    _require_same_base(t_prime, v1)
    return _first_slot(nabla(conn, t_prime, v1), -e)


# ---------------------------------------------------------------------------
# Loop holonomy over an infinitesimal square
# ---------------------------------------------------------------------------

def two_chain(square: Microsquare) -> InfinitesimalTwoChain:
    """Lift a microsquare into its working algebra and attach the two
    formal side generators."""
    point_spec = None
    for comp in (*square.base, *square.a, *square.b, *square.c):
        if isinstance(comp, WeilElement):
            if point_spec is None:
                point_spec = comp.spec
            elif comp.spec != point_spec:
                raise SpecMismatchError(
                    "microsquare components live in different algebras")
    if point_spec is None:
        wspec = D_SQUARE
        offset = 0
    else:
        wspec = tensor(point_spec, D_SQUARE)
        offset = point_spec.generators

    def lift(values):
        return tuple(embed(v, wspec, 0) if isinstance(v, WeilElement) else v
                     for v in values)

    lifted = Microsquare(square.chart, lift(square.base), lift(square.a),
                         lift(square.b), lift(square.c))
    d1 = generator(wspec, offset + 1)
    d2 = generator(wspec, offset + 2)
    return InfinitesimalTwoChain(square=lifted, d1=d1, d2=d2,
                                 working_spec=wspec, point_spec=point_spec,
                                 d_positions=(offset, offset + 1),
                                 source=square)


def contour(chain: InfinitesimalTwoChain
            ) -> tuple[TangentVector, TangentVector, TangentVector, TangentVector]:
    """The four edge jets of the square gamma centred at gamma(0,0):
    gamma(., 0), gamma(d1, .), gamma(., d2), gamma(0, .).  The middle two
    have Weil-valued base points."""
    ms, d1, d2 = chain.square, chain.d1, chain.d2
    edge1 = TangentVector(ms.chart, ms.base, ms.a)
    edge2 = TangentVector(
        ms.chart,
        tuple(x + a * d1 for x, a in zip(ms.base, ms.a)),
        tuple(b + c * d1 for b, c in zip(ms.b, ms.c)))
    edge3 = TangentVector(
        ms.chart,
        tuple(x + b * d2 for x, b in zip(ms.base, ms.b)),
        tuple(a + c * d2 for a, c in zip(ms.a, ms.c)))
    edge4 = TangentVector(ms.chart, ms.base, ms.b)
    return edge1, edge2, edge3, edge4


def holonomy(conn: SyntheticConnection, chain: InfinitesimalTwoChain,
             t3: TangentVector) -> tuple:
    """Transport t3 around the square's contour and return the
    componentwise difference from t3.

    Forward along edge 1 with d1 and edge 2 with d2, then inversely along
    edge 3 (the d1 direction) and edge 4 (the d2 direction) - the unique
    reading that closes the loop.  The difference has zero coefficients
    on 1, d1 and d2; only the d1*d2 slot is populated.
    """
    wspec = chain.working_spec

    def lift(values):
        out = []
        for v in values:
            if isinstance(v, WeilElement):
                if v.spec == wspec:
                    out.append(v)
                elif chain.point_spec is not None and v.spec == chain.point_spec:
                    out.append(embed(v, wspec, 0))
                else:
                    raise SpecMismatchError(
                        f"component algebra {v.spec} does not match the chain")
            else:
                out.append(v)
        return tuple(out)

    t3l = TangentVector(t3.chart, lift(t3.base), lift(t3.vel))
    edge1, edge2, edge3, edge4 = contour(chain)
    _require_same_base(t3l, edge1)

    v1 = transport_r(conn, edge1, t3l, chain.d1)
    v2 = transport_r(conn, edge2, v1, chain.d2)
    v3 = transport_q(conn, edge3, chain.d1, v2)
    v4 = transport_q(conn, edge4, chain.d2, v3)
    _require_same_base(v4, edge1)
    return tuple(after - before for after, before in zip(v4.vel, t3l.vel))


def extract_rtilde(diff: Sequence, chain: InfinitesimalTwoChain,
                   tol: float = DEFAULT_TOLERANCE) -> TangentVector:
    """Factor the loop difference through its d1*d2 slot.

    Enforces that every lower-order coefficient (constant, d1-only,
    d2-only) vanishes - exactly for exact scalars, within ``tol`` for
    floats; a violation raises :class:`ExtractionError` since it signals
    a transport fault, not data to be cleaned.
    """
    p1, p2 = chain.d_positions
    extracted = []
    for idx, comp in enumerate(diff):
        if not isinstance(comp, WeilElement):
            if comp != 0 and abs(comp) > tol:
                raise ExtractionError(
                    f"component {idx}: constant residue {comp!r}")
            extracted.append(0)
            continue
        for exp, coeff in comp.terms.items():
            slot = (exp[p1], exp[p2])
            if slot == (1, 1):
                continue
            bad = abs(coeff) > tol if isinstance(coeff, float) else coeff != 0
            if bad:
                raise ExtractionError(
                    f"component {idx}: lower-order coefficient {coeff!r} "
                    f"on d-slot {slot}")
        if chain.point_spec is None:
            extracted.append(slot_coefficient(comp, (p1, p2), (1, 1)))
        else:
            extracted.append(
                slot_coefficient(comp, (p1, p2), (1, 1), chain.point_spec))
    src = chain.source
    return TangentVector(src.chart, src.base, tuple(extracted))


def riemann_synthetic(conn: SyntheticConnection, t1: TangentVector,
                      t2: TangentVector, t3: TangentVector,
                      tol: float = DEFAULT_TOLERANCE) -> TangentVector:
    """Curvature by loop holonomy: build the connection's square over
    (t1, t2), carry t3 around its contour, and read the d1*d2 slot.
    Trilinear in the arguments and antisymmetric in (t1, t2)."""
    _require_same_base(t1, t3)
    square = nabla(conn, t1, t2)
    chain = two_chain(square)
    diff = holonomy(conn, chain, t3)
    return extract_rtilde(diff, chain, tol)


# ---------------------------------------------------------------------------
# Comparison against the classical oracle
# ---------------------------------------------------------------------------

def classical_loop_value(chart: Chart, x: Sequence[float],
                         t1: Sequence[float], t2: Sequence[float],
                         t3: Sequence[float]) -> np.ndarray:
    """What the loop defect should be, per the classical oracle:
    LOOP_ORACLE_SIGN * R^i_jkl t3^j t1^k t2^l (t3 in the vector slot, the
    (t1, t2) plane in the antisymmetric pair)."""
    oracle = classical_riemann(chart, x)
    return LOOP_ORACLE_SIGN * np.einsum(
        "ijkl,j,k,l->i", oracle.components,
        np.asarray(t3, dtype=float), np.asarray(t1, dtype=float),
        np.asarray(t2, dtype=float))


@dataclass(frozen=True)
class ComparisonRecord:
    point: tuple[float, ...]
    synthetic: tuple[float, ...]
    classical: tuple[float, ...]
    abs_err: float
    rel_err: float

    def to_json(self) -> dict:
        return {
            "point": list(self.point),
            "synthetic": list(self.synthetic),
            "classical": list(self.classical),
            "abs_err": self.abs_err,
            "rel_err": self.rel_err,
        }


@dataclass(frozen=True)
class CurvatureComparison:
    chart: str
    convention: str
    vectors: tuple[tuple[float, ...], tuple[float, ...], tuple[float, ...]]
    records: tuple[ComparisonRecord, ...]
    tolerance: float

    @property
    def max_rel_err(self) -> float:
        return max((r.rel_err for r in self.records), default=0.0)

    @property
    def passed(self) -> bool:
        return self.max_rel_err <= self.tolerance

    def to_json(self) -> dict:
        return {
            "chart": self.chart,
            "convention": self.convention,
            "vectors": {"t1": list(self.vectors[0]), "t2": list(self.vectors[1]),
                        "t3": list(self.vectors[2])},
            "tolerance": self.tolerance,
            "max_rel_err": self.max_rel_err,
            "passed": self.passed,
            "records": [r.to_json() for r in self.records],
        }

    def to_csv(self) -> str:
        return comparison_csv([r.to_json() for r in self.records])


def comparison_csv(records: Sequence[dict]) -> str:
    """CSV form of a comparison report: one row per (point, component),
    floats at 17 significant digits."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["point_index", "point", "component",
                     "synthetic", "classical", "abs_err", "rel_err"])
    fmt = lambda v: format(v, ".17g")
    for idx, rec in enumerate(records):
        point = ";".join(fmt(v) for v in rec["point"])
        for comp, (syn, cla) in enumerate(zip(rec["synthetic"],
                                              rec["classical"])):
            writer.writerow([idx, point, comp, fmt(syn), fmt(cla),
                             fmt(rec["abs_err"]), fmt(rec["rel_err"])])
    return buf.getvalue()


def compare_at_point(conn: SyntheticConnection, x: Sequence[float],
                     t1: Sequence[float], t2: Sequence[float],
                     t3: Sequence[float],
                     oracle_chart: Chart | None = None) -> ComparisonRecord:
    """One synthetic-vs-classical record.  The oracle may use a different
    chart object (e.g. closed forms while the connection runs finite
    differences)."""
    pt = tuple(float(v) for v in x)
    vec1 = TangentVector(conn.chart, pt, tuple(t1))
    vec2 = TangentVector(conn.chart, pt, tuple(t2))
    vec3 = TangentVector(conn.chart, pt, tuple(t3))
    syn = riemann_synthetic(conn, vec1, vec2, vec3)
    syn_vec = tuple(float(v) for v in syn.vel)
    cla = classical_loop_value(oracle_chart or conn.chart, pt, t1, t2, t3)
    abs_err = float(max(abs(s - c) for s, c in zip(syn_vec, cla)))
    scale = float(max(np.max(np.abs(cla)), 1e-12))
    return ComparisonRecord(point=pt, synthetic=syn_vec,
                            classical=tuple(float(c) for c in cla),
                            abs_err=abs_err, rel_err=abs_err / scale)


def curvature_report(chart: Chart, points: Sequence[Sequence[float]],
                     t1: Sequence[float] | None = None,
                     t2: Sequence[float] | None = None,
                     t3: Sequence[float] | None = None,
                     tolerance: float = 1e-6) -> CurvatureComparison:
    """Synthetic-vs-classical comparison over a list of points with one
    vector triple (defaults: first two basis vectors, t3 = t1)."""
    n = chart.dim
    if t1 is None:
        t1 = tuple(1.0 if i == 0 else 0.0 for i in range(n))
    if t2 is None:
        t2 = tuple(1.0 if i == min(1, n - 1) else 0.0 for i in range(n))
    if t3 is None:
        t3 = tuple(t1)
    conn = SyntheticConnection(chart)
    records = tuple(compare_at_point(conn, pt, t1, t2, t3) for pt in points)
    return CurvatureComparison(chart=chart.describe(), convention=CONVENTION,
                               vectors=(tuple(map(float, t1)),
                                        tuple(map(float, t2)),
                                        tuple(map(float, t3))),
                               records=records, tolerance=tolerance)


# ---------------------------------------------------------------------------
# Microlinearity checks
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str


@dataclass(frozen=True)
class MicrolinearityReport:
    checks: tuple[CheckResult, ...]
    counts: dict
    chart: str | None = None

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json(self) -> dict:
        return {
            "passed": self.passed,
            "chart": self.chart,
            "counts": self.counts,
            "checks": [{"name": c.name, "passed": c.passed, "detail": c.detail}
                       for c in self.checks],
        }


def _axis_restriction(elem: WeilElement, axis: int) -> WeilElement:
    """Restrict a map on a 2-generator space along one axis: substitute 0
    for the other generator, producing a one-generator jet."""
    other = 1 - axis
    terms = {}
    for exp, coeff in elem.terms.items():
        if exp[other] == 0:
            terms[(exp[axis],)] = coeff
    return WeilElement(Dk(1), terms)


def microlinearity_checks(chart: Chart | None = None) -> MicrolinearityReport:
    """Coefficient-count and gluing checks for the basic infinitesimal
    diagrams: maps on the square have exactly the four coefficients
    (1, d1, d2, d1*d2); restriction to the first-order cross forgets
    exactly the mixed one; two one-variable jets agreeing at 0 glue to a
    unique map on the cross.  The checks are chart-independent; a chart
    argument only labels the report.
    """
    label = chart.describe() if chart is not None else None
    checks: list[CheckResult] = []
    d_spec = Dk(1)
    cross = DOfN(2)
    square = D_SQUARE

    counts = {
        "D": len(list(d_spec.monomials())),
        "D(2)": len(list(cross.monomials())),
        "DxD": len(list(square.monomials())),
    }
    checks.append(CheckResult(
        "coefficient_counts", counts == {"D": 2, "D(2)": 3, "DxD": 4},
        f"got {counts}"))

    f = WeilElement(square, {(0, 0): 3, (1, 0): 1, (0, 1): -2, (1, 1): 7})
    restricted = weil.restrict(f, cross)
    expect = WeilElement(cross, {(0, 0): 3, (1, 0): 1, (0, 1): -2})
    dropped = {exp for exp in f.terms if exp not in restricted.terms}
    checks.append(CheckResult(
        "restriction_forgets_mixed_slot",
        restricted == expect and dropped == {(1, 1)},
        f"restricted to {weil.to_string(restricted)}, dropped {sorted(dropped)}"))

    f1 = WeilElement(d_spec, {(0,): 3, (1,): 1})      # 3 + d
    f2 = WeilElement(d_spec, {(0,): 3, (1,): -2})     # 3 - 2d
    glued = WeilElement(cross, {
        (0, 0): f1.augmentation(),
        (1, 0): f1.coefficient((1,)),
        (0, 1): f2.coefficient((1,)),
    })
    ok = (_axis_restriction(glued, 0) == f1 and _axis_restriction(glued, 1) == f2
          and f1.augmentation() == f2.augmentation())
    unique = True
    for exp in [(0, 0), (1, 0), (0, 1)]:
        perturbed = glued + WeilElement(cross, {exp: 1})
        if (_axis_restriction(perturbed, 0) == f1
                and _axis_restriction(perturbed, 1) == f2):
            unique = False
    checks.append(CheckResult(
        "gluing_exists_and_unique", ok and unique,
        f"glued map {weil.to_string(glued, ['x1', 'x2'])}"))

    f2_bad = WeilElement(d_spec, {(0,): 4, (1,): -2})
    solvable = f1.augmentation() == f2_bad.augmentation()
    checks.append(CheckResult(
        "gluing_detects_mismatched_basepoint", not solvable,
        "jets with different values at 0 admit no common extension"))

    return MicrolinearityReport(checks=tuple(checks), counts=counts,
                                chart=label)
