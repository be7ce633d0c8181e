"""Arithmetic of Weil algebras realized as truncated polynomial rings.

An infinitesimal space is described by a monomial nilpotency rule: a
predicate on exponent vectors saying which monomials are annihilated.
Elements are sparse maps ``exponent vector -> coefficient`` kept fully
reduced (annihilated monomials are never stored, zero coefficients are
pruned), so structural equality is semantic equality.

Coefficients may be exact (``int`` / ``fractions.Fraction``) for
algebraic-law work or ``float`` for geometry; both modes run through the
same code paths.  Exact arithmetic never rounds; float comparisons go
through an explicit tolerance (``close_to``, ``is_infinitesimal``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterator, Mapping, Sequence

Scalar = int | float | Fraction
ExpVec = tuple[int, ...]

#: Absolute tolerance used by float-mode comparisons unless overridden.
DEFAULT_TOLERANCE = 1e-12


class SpecMismatchError(ValueError):
    """Operands live in different algebras (or have different arity)."""


class NotInfinitesimalError(ValueError):
    """An operand required to have zero augmentation does not."""


class MissingDerivativeError(ValueError):
    """A field cannot supply partial derivatives of the required order."""


# ---------------------------------------------------------------------------
# Infinitesimal space presentations
# ---------------------------------------------------------------------------

_KINDS = ("Dk", "DOfN", "DkOfN", "PowerDk", "ProductDk", "DInfTrunc", "Tensor")


@dataclass(frozen=True)
class InfinitesimalSpec:
    """Presentation of one infinitesimal space by a monomial nilpotency rule.

    Do not call the constructor directly; use the factories :func:`Dk`,
    :func:`DOfN`, :func:`DkOfN`, :func:`PowerDk`, :func:`ProductDk`,
    :func:`DInfTrunc` and :func:`tensor`, which normalize degenerate
    presentations so equal predicates get equal canonical forms.
    """

    kind: str
    generators: int
    order: int | None = None                           # k (or truncation K)
    orders: tuple[int, ...] | None = None              # per-generator orders
    parts: tuple["InfinitesimalSpec", ...] | None = None

    def vanishes(self, exponents: Sequence[int]) -> bool:
        """Whether the monomial with these exponents is annihilated.

        The rule is a monomial ideal, hence upward closed: raising any
        exponent of an annihilated monomial keeps it annihilated.
        """
        k = self.kind
        if k == "Dk":
            return exponents[0] > self.order
        if k == "DOfN":
            return sum(exponents) > 1
        if k == "DkOfN" or k == "DInfTrunc":
            return sum(exponents) > self.order
        if k == "PowerDk":
            ko = self.order
            return any(e > ko for e in exponents)
        if k == "ProductDk":
            return any(e > ko for e, ko in zip(exponents, self.orders))
        # Tensor: a monomial dies as soon as it dies in one factor
        pos = 0
        for part in self.parts:
            if part.vanishes(exponents[pos:pos + part.generators]):
                return True
            pos += part.generators
        return False

    def max_degree(self) -> int:
        """Largest total degree of a surviving monomial."""
        k = self.kind
        if k == "Dk" or k == "DkOfN" or k == "DInfTrunc":
            return self.order
        if k == "DOfN":
            return 1
        if k == "PowerDk":
            return self.order * self.generators
        if k == "ProductDk":
            return sum(self.orders)
        return sum(p.max_degree() for p in self.parts)

    def monomials(self) -> Iterator[ExpVec]:
        """All surviving exponent vectors, in graded lexicographic order."""
        for e in iter_exponents(self.generators, self.max_degree()):
            if not self.vanishes(e):
                yield e

    def __str__(self) -> str:
        k = self.kind
        if k == "Dk":
            return "D" if self.order == 1 else f"D_{self.order}"
        if k == "DOfN":
            return f"D({self.generators})"
        if k == "DkOfN":
            return f"D_{self.order}({self.generators})"
        if k == "PowerDk":
            return f"(D_{self.order})^{self.generators}"
        if k == "ProductDk":
            return "*".join(f"D_{ko}" for ko in self.orders)
        if k == "DInfTrunc":
            return f"Dinf({self.generators},{self.order})"
        return " @ ".join(str(p) for p in self.parts)


def Dk(k: int) -> InfinitesimalSpec:
    """One generator x with x^(k+1) = 0."""
    if k < 1:
        raise ValueError(f"nilpotency order must be >= 1, got {k}")
    return InfinitesimalSpec("Dk", 1, order=k)


def DOfN(n: int) -> InfinitesimalSpec:
    """n generators with every product x_i*x_j = 0 (i = j allowed)."""
    if n < 1:
        raise ValueError(f"generator count must be >= 1, got {n}")
    if n == 1:
        return Dk(1)
    return InfinitesimalSpec("DOfN", n)


def DkOfN(k: int, n: int) -> InfinitesimalSpec:
    """n generators, every product of k+1 of them (repeats allowed) is 0."""
    if k < 1 or n < 1:
        raise ValueError(f"need k >= 1 and n >= 1, got k={k}, n={n}")
    if n == 1:
        return Dk(k)
    if k == 1:
        return DOfN(n)
    return InfinitesimalSpec("DkOfN", n, order=k)


def PowerDk(k: int, n: int) -> InfinitesimalSpec:
    """n independent copies of D_k: x_i^(k+1) = 0 per generator."""
    if k < 1 or n < 1:
        raise ValueError(f"need k >= 1 and n >= 1, got k={k}, n={n}")
    if n == 1:
        return Dk(k)
    return InfinitesimalSpec("PowerDk", n, order=k)


def ProductDk(*ks: int) -> InfinitesimalSpec:
    """D_{k1} x ... x D_{kn} with per-generator nilpotency orders."""
    if not ks:
        raise ValueError("need at least one factor")
    if any(k < 1 for k in ks):
        raise ValueError(f"all orders must be >= 1, got {ks}")
    if len(ks) == 1:
        return Dk(ks[0])
    if len(set(ks)) == 1:
        return PowerDk(ks[0], len(ks))
    return InfinitesimalSpec("ProductDk", len(ks), orders=tuple(ks))


def DInfTrunc(n: int, K: int = 2) -> InfinitesimalSpec:
    """Working truncation of the unbounded-order space on n generators.

    The unbounded object is a union of bounded-order spaces, so any single
    computation factors through a finite order; K is that working order and
    the rule coincides with ``DkOfN(K, n)``.
    """
    if n < 1 or K < 1:
        raise ValueError(f"need n >= 1 and K >= 1, got n={n}, K={K}")
    return InfinitesimalSpec("DInfTrunc", n, order=K)


def tensor(*parts: InfinitesimalSpec) -> InfinitesimalSpec:
    """Tensor product: generators concatenate, a monomial dies if any
    factor's slice dies.  Nested tensors are flattened."""
    flat: list[InfinitesimalSpec] = []
    for p in parts:
        if p.kind == "Tensor":
            flat.extend(p.parts)
        else:
            flat.append(p)
    if len(flat) == 1:
        return flat[0]
    return InfinitesimalSpec("Tensor", sum(p.generators for p in flat),
                             parts=tuple(flat))


def iter_exponents(n: int, max_total: int) -> Iterator[ExpVec]:
    """All exponent vectors of length n with total degree <= max_total,
    in graded lexicographic order."""
    def shells(slots: int, total: int) -> Iterator[tuple[int, ...]]:
        if slots == 1:
            yield (total,)
            return
        for head in range(total, -1, -1):
            for rest in shells(slots - 1, total - head):
                yield (head,) + rest

    for d in range(max_total + 1):
        yield from shells(n, d)


# ---------------------------------------------------------------------------
# Elements
# ---------------------------------------------------------------------------

class WeilElement:
    """Reduced sparse polynomial in the quotient ring of a spec.

    Immutable by convention: no method mutates ``terms`` after
    construction, so values are safe to share across threads.
    """

    __slots__ = ("spec", "terms")

    def __init__(self, spec: InfinitesimalSpec,
                 terms: Mapping[ExpVec, Scalar] | None = None):
        reduced: dict[ExpVec, Scalar] = {}
        if terms:
            vanishes = spec.vanishes
            for exp, coeff in terms.items():
                if coeff == 0 or vanishes(exp):
                    continue
                exp = tuple(exp)
                if len(exp) != spec.generators:
                    raise SpecMismatchError(
                        f"exponent vector {exp} has wrong arity for {spec}")
                reduced[exp] = coeff
        self.spec = spec
        self.terms = reduced

    # -- construction helpers ------------------------------------------------

    @staticmethod
    def constant(spec: InfinitesimalSpec, value: Scalar) -> "WeilElement":
        return WeilElement(spec, {(0,) * spec.generators: value})

    def _new(self, terms: dict[ExpVec, Scalar]) -> "WeilElement":
        out = object.__new__(WeilElement)
        out.spec = self.spec
        out.terms = terms
        return out

    # -- ring structure --------------------------------------------------------

    def _coerce(self, other) -> "WeilElement | None":
        if isinstance(other, WeilElement):
            if other.spec != self.spec:
                raise SpecMismatchError(
                    f"cannot combine elements of {self.spec} and {other.spec}")
            return other
        if isinstance(other, (int, float, Fraction)):
            return WeilElement.constant(self.spec, other)
        return None

    def __add__(self, other) -> "WeilElement":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        out = dict(self.terms)
        for exp, coeff in rhs.terms.items():
            acc = out.get(exp, 0) + coeff
            if acc == 0:
                out.pop(exp, None)
            else:
                out[exp] = acc
        return self._new(out)

    __radd__ = __add__

    def __neg__(self) -> "WeilElement":
        return self._new({e: -c for e, c in self.terms.items()})

    def __sub__(self, other) -> "WeilElement":
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        return self + (-rhs)

    def __rsub__(self, other) -> "WeilElement":
        return (-self) + other

    def __mul__(self, other) -> "WeilElement":
        if isinstance(other, WeilElement):
            if other.spec != self.spec:
                raise SpecMismatchError(
                    f"cannot combine elements of {self.spec} and {other.spec}")
            vanishes = self.spec.vanishes
            out: dict[ExpVec, Scalar] = {}
            for e1, c1 in self.terms.items():
                for e2, c2 in other.terms.items():
                    exp = tuple(a + b for a, b in zip(e1, e2))
                    if vanishes(exp):
                        continue
                    acc = out.get(exp, 0) + c1 * c2
                    if acc == 0:
                        out.pop(exp, None)
                    else:
                        out[exp] = acc
            return self._new(out)
        if isinstance(other, (int, float, Fraction)):
            if other == 0:
                return self._new({})
            return self._new({e: c * other for e, c in self.terms.items()})
        return NotImplemented

    def __rmul__(self, other) -> "WeilElement":
        if isinstance(other, (int, float, Fraction)):
            if other == 0:
                return self._new({})
            return self._new({e: other * c for e, c in self.terms.items()})
        return NotImplemented

    def __truediv__(self, other) -> "WeilElement":
        if isinstance(other, (int, float, Fraction)):
            if isinstance(other, int):
                other = Fraction(other)
            return self._new({e: c / other for e, c in self.terms.items()})
        return NotImplemented

    def __pow__(self, n: int) -> "WeilElement":
        if not isinstance(n, int) or n < 0:
            raise ValueError(f"exponent must be a non-negative int, got {n}")
        result = WeilElement.constant(self.spec, 1)
        for _ in range(n):
            result = result * self
            if not result.terms:
                break
        return result

    # -- inspection ------------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def augmentation(self) -> Scalar:
        """Constant term; the projection killing all nilpotents.

        A ring morphism: it commutes with addition and multiplication.
        """
        return self.terms.get((0,) * self.spec.generators, 0)

    def coefficient(self, exponents: Sequence[int]) -> Scalar:
        return self.terms.get(tuple(exponents), 0)

    def sorted_terms(self) -> list[tuple[ExpVec, Scalar]]:
        """Terms in graded order: total degree, then earlier generators
        first (so x1 precedes x2, x1^2 precedes x1*x2)."""
        return sorted(self.terms.items(),
                      key=lambda t: (sum(t[0]), tuple(-e for e in t[0])))

    def __eq__(self, other) -> bool:
        if isinstance(other, WeilElement):
            return self.spec == other.spec and self.terms == other.terms
        if isinstance(other, (int, float, Fraction)):
            if other == 0:
                return not self.terms
            return self.terms == {(0,) * self.spec.generators: other}
        return NotImplemented

    def __ne__(self, other) -> bool:
        result = self.__eq__(other)
        return result if result is NotImplemented else not result

    __hash__ = None  # mutable dict inside; structural equality only

    def close_to(self, other, tol: float = DEFAULT_TOLERANCE) -> bool:
        """Coefficient-wise comparison with absolute tolerance."""
        rhs = self._coerce(other)
        if rhs is None:
            return NotImplemented
        for exp in self.terms.keys() | rhs.terms.keys():
            if abs(self.terms.get(exp, 0) - rhs.terms.get(exp, 0)) > tol:
                return False
        return True

    def __repr__(self) -> str:
        return f"<{self.spec}| {to_string(self)}>"


# ---------------------------------------------------------------------------
# Operations
# ---------------------------------------------------------------------------

def zero(spec: InfinitesimalSpec) -> WeilElement:
    return WeilElement(spec)


def one(spec: InfinitesimalSpec) -> WeilElement:
    return WeilElement.constant(spec, 1)


def generator(spec: InfinitesimalSpec, i: int) -> WeilElement:
    """The i-th generator monomial (1-based), reduced."""
    if not 1 <= i <= spec.generators:
        raise IndexError(
            f"generator index {i} out of range 1..{spec.generators}")
    exp = tuple(1 if j == i - 1 else 0 for j in range(spec.generators))
    return WeilElement(spec, {exp: 1})


def generators(spec: InfinitesimalSpec) -> list[WeilElement]:
    return [generator(spec, i) for i in range(1, spec.generators + 1)]


def add(a: WeilElement, b: WeilElement) -> WeilElement:
    return a + b


def mul(a: WeilElement, b: WeilElement) -> WeilElement:
    return a * b


def scale(c: Scalar, a: WeilElement) -> WeilElement:
    return a * c


def augmentation(a: WeilElement) -> Scalar:
    return a.augmentation()


def is_infinitesimal(a: WeilElement, tol: float = DEFAULT_TOLERANCE) -> bool:
    """Zero augmentation, i.e. membership in the nilpotent ideal.

    Exact coefficients are compared exactly; floats within ``tol``.
    """
    aug = a.augmentation()
    if isinstance(aug, float):
        return abs(aug) <= tol
    return aug == 0


def _negligible(a: WeilElement, tol: float) -> bool:
    """Zero up to tolerance: float coefficients within tol, exact ones
    exactly zero (reduced elements never store exact zeros)."""
    return all(abs(c) <= tol if isinstance(c, float) else False
               for c in a.terms.values())


def nilpotency_order(a: WeilElement, tol: float = DEFAULT_TOLERANCE) -> int:
    """Smallest m >= 1 with a^m = 0; requires an infinitesimal input.

    Bounded by max surviving total degree + 1, since an element without
    constant term has all m-th power monomials of total degree >= m.  In
    float mode a power counts as zero once every coefficient is within
    ``tol`` (a tolerance-level augmentation never cancels exactly).
    """
    if not is_infinitesimal(a, tol):
        raise NotInfinitesimalError(
            f"nilpotency order undefined: augmentation is {a.augmentation()}")
    bound = a.spec.max_degree() + 1
    power = a
    m = 1
    while not (power.is_zero() or _negligible(power, tol)):
        power = power * a
        m += 1
        if m > bound:  # pragma: no cover - unreachable for reduced inputs
            raise AssertionError("nilpotency bound exceeded")
    return m


def spec_contains(small: InfinitesimalSpec, large: InfinitesimalSpec,
                  degree_bound: int) -> bool:
    """Whether `small` sits inside `large` as infinitesimal spaces.

    Containment of spaces is reverse containment of monomial ideals:
    every monomial annihilated in `large` must be annihilated in `small`.
    Checked by exhausting exponent vectors up to ``degree_bound``, which
    must reach past the highest order either spec can realize.
    """
    if small.generators != large.generators:
        raise SpecMismatchError(
            f"generator counts differ: {small.generators} vs {large.generators}")
    need = max(small.max_degree(), large.max_degree()) + 1
    if degree_bound < need:
        raise ValueError(
            f"degree_bound {degree_bound} too small, need >= {need}")
    for exp in iter_exponents(small.generators, degree_bound):
        if large.vanishes(exp) and not small.vanishes(exp):
            return False
    return True


def containment_witness(small: InfinitesimalSpec, large: InfinitesimalSpec,
                        degree_bound: int) -> ExpVec | None:
    """A monomial surviving in `large` but annihilated in `small`, i.e. a
    strictness witness for small < large.  None if none exists below the
    bound."""
    if small.generators != large.generators:
        raise SpecMismatchError(
            f"generator counts differ: {small.generators} vs {large.generators}")
    for exp in iter_exponents(small.generators, degree_bound):
        if small.vanishes(exp) and not large.vanishes(exp):
            return exp
    return None


def kl_extract(f_values: WeilElement) -> dict[ExpVec, Scalar]:
    """Unique polynomial coefficients of a map out of the space.

    The reduced canonical form *is* the coefficient list; extraction is
    read-off and round-trips exactly with :func:`evaluate_coefficients`.
    """
    return dict(f_values.sorted_terms())


def evaluate_coefficients(spec: InfinitesimalSpec,
                          coefficients: Mapping[ExpVec, Scalar]) -> WeilElement:
    """Build the element with the given polynomial coefficients (reduced)."""
    return WeilElement(spec, coefficients)


def restrict(a: WeilElement, new_spec: InfinitesimalSpec) -> WeilElement:
    """Push an element along a quotient onto a smaller space.

    Well-defined only when the target's ideal contains the source's,
    i.e. the target space sits inside the source space.
    """
    if new_spec.generators != a.spec.generators:
        raise SpecMismatchError(
            f"generator counts differ: {a.spec.generators} vs {new_spec.generators}")
    bound = max(a.spec.max_degree(), new_spec.max_degree()) + 1
    if not spec_contains(new_spec, a.spec, bound):
        raise SpecMismatchError(
            f"{new_spec} is not contained in {a.spec}: restriction undefined")
    return WeilElement(new_spec, a.terms)


def embed(a: WeilElement, target: InfinitesimalSpec,
          offset: int) -> WeilElement:
    """Re-index an element into a wider spec, placing its generators at
    positions offset..offset+n-1.  Coefficients are untouched."""
    n = a.spec.generators
    if offset < 0 or offset + n > target.generators:
        raise SpecMismatchError(
            f"cannot embed {n} generators at offset {offset} into {target}")
    pad_left = (0,) * offset
    pad_right = (0,) * (target.generators - offset - n)
    return WeilElement(
        target, {pad_left + exp + pad_right: c for exp, c in a.terms.items()})


def slot_coefficient(a: WeilElement, positions: Sequence[int],
                     wanted: Sequence[int],
                     target: InfinitesimalSpec | None = None) -> "WeilElement | Scalar":
    """Collect terms whose exponents at `positions` equal `wanted`, with
    those positions stripped.

    With ``target`` the remainder is returned as an element of it (arity
    must match the stripped length); without, the stripped exponents must
    be exhausted and a plain scalar is returned.
    """
    positions = tuple(positions)
    wanted = tuple(wanted)
    pos_set = set(positions)
    collected: dict[ExpVec, Scalar] = {}
    for exp, coeff in a.terms.items():
        if tuple(exp[p] for p in positions) != wanted:
            continue
        rest = tuple(e for j, e in enumerate(exp) if j not in pos_set)
        collected[rest] = collected.get(rest, 0) + coeff
    if target is None:
        if any(any(rest) for rest in collected):
            raise SpecMismatchError(
                "leftover generators; pass a target spec to keep them")
        return collected.get((), 0) if collected else 0
    return WeilElement(target, collected)


# ---------------------------------------------------------------------------
# Exact Taylor evaluation on nilpotent displacements
# ---------------------------------------------------------------------------

def taylor_eval(field, x: Sequence[Scalar],
                displacements: Sequence[WeilElement],
                tol: float = DEFAULT_TOLERANCE) -> WeilElement:
    """Evaluate a smooth scalar field at ``x + displacements``.

    ``field`` supplies Taylor coefficients through ``jet(x, order)``
    (mapping multi-index alpha -> d^alpha f(x) / alpha!); see
    :mod:`weilgeo.fields`.  Because the displacements are nilpotent the
    finite sum over surviving powers is the exact value, not an
    approximation; its augmentation is f(x).

    Raises :class:`NotInfinitesimalError` for a displacement with nonzero
    augmentation, and :class:`MissingDerivativeError` when the field's
    available derivative order is below what the surviving powers need.
    """
    eps = list(displacements)
    if len(eps) != len(x):
        raise ValueError(f"{len(x)} coordinates but {len(eps)} displacements")
    spec = None
    for e in eps:
        if isinstance(e, WeilElement):
            if spec is None:
                spec = e.spec
            elif e.spec != spec:
                raise SpecMismatchError("displacements live in different algebras")
    if spec is None:
        raise ValueError("at least one displacement must be a WeilElement")
    eps = [e if isinstance(e, WeilElement) else WeilElement.constant(spec, e)
           for e in eps]
    for e in eps:
        if not is_infinitesimal(e, tol):
            raise NotInfinitesimalError(
                f"displacement has augmentation {e.augmentation()}")

    cap = getattr(field, "useful_order", None)
    limit = spec.max_degree() if cap is None else min(spec.max_degree(), cap)

    # Enumerate surviving displacement powers eps^alpha by increasing degree.
    m = len(eps)
    zero_alpha = (0,) * m
    powers: dict[tuple[int, ...], WeilElement] = {zero_alpha: one(spec)}
    frontier = {zero_alpha: powers[zero_alpha]}
    needed_order = 0
    for _ in range(limit):
        new: dict[tuple[int, ...], WeilElement] = {}
        for alpha, p in frontier.items():
            start = 0
            for j in range(m - 1, -1, -1):
                if alpha[j]:
                    start = j
                    break
            for i in range(start, m):
                q = p * eps[i]
                if q.is_zero():
                    continue
                beta = alpha[:i] + (alpha[i] + 1,) + alpha[i + 1:]
                new[beta] = q
        if not new:
            break
        powers.update(new)
        frontier = new
        needed_order += 1

    available = getattr(field, "available_order", None)
    if available is not None and needed_order > available:
        raise MissingDerivativeError(
            f"need partial derivatives up to order {needed_order}, "
            f"field provides {available}")

    jet = field.jet(tuple(x), needed_order)
    result = zero(spec)
    for alpha, p in powers.items():
        coeff = jet.get(alpha, 0)
        if coeff != 0:
            result = result + p * coeff
    return result


# ---------------------------------------------------------------------------
# Analytic primitives on elements (exact finite Taylor around augmentation)
# ---------------------------------------------------------------------------

def apply_analytic(x, value_fn: Callable, deriv_fn: Callable):
    """f(x) for an element x, via f(a+u) = sum_j f^(j)(a)/j! u^j where
    a is the augmentation and u the nilpotent part.  Exact: the sum stops
    when the powers of u die.  Scalars pass straight through value_fn."""
    if not isinstance(x, WeilElement):
        return value_fn(x)
    a0 = x.augmentation()
    u = x - a0
    result = WeilElement.constant(x.spec, value_fn(a0))
    upow = one(x.spec)
    factorial = 1
    for j in range(1, x.spec.max_degree() + 1):
        upow = upow * u
        if upow.is_zero():
            break
        factorial *= j
        d = deriv_fn(j, a0)
        if d != 0:
            result = result + upow * (d / factorial)
    return result


def _sin_deriv(j: int, a):
    return (math.sin(a), math.cos(a), -math.sin(a), -math.cos(a))[j % 4]


def sin(x):
    return apply_analytic(x, math.sin, _sin_deriv)


def cos(x):
    return apply_analytic(x, math.cos, lambda j, a: _sin_deriv(j + 1, a))


def exp(x):
    return apply_analytic(x, math.exp, lambda j, a: math.exp(a))


def _recip_deriv(j: int, a):
    # d^j/da^j (1/a) = (-1)^j j! a^-(j+1); exact for Fraction input
    sign = -1 if j % 2 else 1
    if isinstance(a, (int, Fraction)):
        return sign * math.factorial(j) * Fraction(1, 1) / Fraction(a) ** (j + 1)
    return sign * math.factorial(j) / a ** (j + 1)


def reciprocal(x):
    """Multiplicative inverse of a unit (nonzero augmentation)."""
    if isinstance(x, WeilElement) and x.augmentation() == 0:
        raise ZeroDivisionError("element with zero augmentation is not a unit")
    return apply_analytic(
        x,
        lambda a: Fraction(1) / a if isinstance(a, (int, Fraction)) else 1.0 / a,
        _recip_deriv)


def _sqrt_deriv(j: int, a):
    coeff = 1.0
    p = 0.5
    for _ in range(j):
        coeff *= p
        p -= 1.0
    return coeff * a ** p


def sqrt(x):
    return apply_analytic(x, math.sqrt, _sqrt_deriv)


def cot(x):
    """cos * (1/sin); defined where sin has nonzero augmentation.  The
    scalar path mirrors the element path's operation order exactly, so
    float evaluations at a point and at a nilpotent displacement of it
    share a bit-identical constant term."""
    if isinstance(x, WeilElement):
        return cos(x) * reciprocal(sin(x))
    return math.cos(x) * (1.0 / math.sin(x))


# ---------------------------------------------------------------------------
# Formatting and serialization
# ---------------------------------------------------------------------------

def default_names(n: int) -> list[str]:
    return ["x"] if n == 1 else [f"x{i}" for i in range(1, n + 1)]


def _format_coeff(c: Scalar) -> str:
    if isinstance(c, Fraction):
        return str(c.numerator) if c.denominator == 1 else f"{c.numerator}/{c.denominator}"
    if isinstance(c, float):
        return repr(c)
    return str(c)


def to_string(a: WeilElement, names: Sequence[str] | None = None) -> str:
    """Canonical human-readable form, graded-lex term order."""
    if a.is_zero():
        return "0"
    if names is None:
        names = default_names(a.spec.generators)
    pieces: list[str] = []
    for exp, coeff in a.sorted_terms():
        mono = "*".join(
            name if e == 1 else f"{name}^{e}"
            for name, e in zip(names, exp) if e)
        negative = coeff < 0
        mag = -coeff if negative else coeff
        if not mono:
            body = _format_coeff(mag)
        elif mag == 1:
            body = mono
        else:
            body = f"{_format_coeff(mag)}*{mono}"
        if not pieces:
            pieces.append(f"-{body}" if negative else body)
        else:
            pieces.append(f"- {body}" if negative else f"+ {body}")
    return " ".join(pieces)


def spec_to_json(spec: InfinitesimalSpec) -> dict:
    out: dict = {"kind": spec.kind}
    if spec.kind == "Dk":
        out["k"] = spec.order
        out["n"] = 1
    elif spec.kind == "DOfN":
        out["n"] = spec.generators
    elif spec.kind in ("DkOfN", "PowerDk"):
        out["k"] = spec.order
        out["n"] = spec.generators
    elif spec.kind == "ProductDk":
        out["orders"] = list(spec.orders)
        out["n"] = spec.generators
    elif spec.kind == "DInfTrunc":
        out["n"] = spec.generators
        out["K"] = spec.order
    else:
        out["parts"] = [spec_to_json(p) for p in spec.parts]
    return out


def spec_from_json(data: Mapping) -> InfinitesimalSpec:
    kind = data["kind"]
    if kind == "Dk":
        return Dk(data["k"])
    if kind == "DOfN":
        return DOfN(data["n"])
    if kind == "DkOfN":
        return DkOfN(data["k"], data["n"])
    if kind == "PowerDk":
        return PowerDk(data["k"], data["n"])
    if kind == "ProductDk":
        return ProductDk(*data["orders"])
    if kind == "DInfTrunc":
        return DInfTrunc(data["n"], data["K"])
    if kind == "Tensor":
        return tensor(*(spec_from_json(p) for p in data["parts"]))
    raise ValueError(f"unknown spec kind {kind!r}")


def _coeff_to_json(c: Scalar):
    # exact values (int or Fraction) travel as "p/q" strings, floats as
    # JSON numbers, so the two modes stay distinguishable on the wire
    if isinstance(c, Fraction):
        return f"{c.numerator}/{c.denominator}"
    if isinstance(c, int):
        return f"{c}/1"
    return c


def _coeff_from_json(v) -> Scalar:
    if isinstance(v, str):
        num, _, den = v.partition("/")
        return Fraction(int(num), int(den) if den else 1)
    return v


def element_to_json(a: WeilElement) -> dict:
    """Stable JSON form: terms sorted lexicographically by exponent list,
    exact rationals as "p/q" strings, floats as numbers."""
    terms = [{"exp": list(exp), "coeff": _coeff_to_json(coeff)}
             for exp, coeff in sorted(a.terms.items())]
    return {"spec": spec_to_json(a.spec), "terms": terms}


def element_from_json(data: Mapping) -> WeilElement:
    spec = spec_from_json(data["spec"])
    terms = {tuple(t["exp"]): _coeff_from_json(t["coeff"])
             for t in data["terms"]}
    return WeilElement(spec, terms)
