"""Free pointed commutative monoids, monomial localizations and chart monoids.

Elements are exponent vectors.  The base monoid is always {0, 1}, so an
element is either :data:`ZERO` or a :class:`Monomial`.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from math import comb
from typing import Iterator, Union


class MonoidError(ValueError):
    pass


class _Zero:
    __slots__ = ()

    def __repr__(self) -> str:
        return "ZERO"

    def __reduce__(self):
        return (_zero, ())


def _zero() -> "_Zero":
    return ZERO


ZERO = _Zero()


@dataclass(frozen=True, order=True)
class Monomial:
    exps: tuple[int, ...]


MonoidValue = Union[Monomial, _Zero]


@dataclass(frozen=True)
class MonoidCtx:
    """A free pointed monoid on named generators, optionally localized.

    ``inverted`` holds indices of generators that are units, so their
    exponents may be negative.
    """

    names: tuple[str, ...]
    inverted: frozenset[int] = frozenset()
    graded: bool = True

    def __post_init__(self):
        if len(set(self.names)) != len(self.names):
            raise MonoidError(f"duplicate generator names in {self.names}")
        bad = [i for i in self.inverted if not 0 <= i < len(self.names)]
        if bad:
            raise MonoidError(f"inverted indices out of range: {sorted(bad)}")

    @property
    def rank(self) -> int:
        return len(self.names)

    def weights(self) -> tuple[int, ...]:
        return (1,) * self.rank

    def is_valid(self, a: MonoidValue) -> bool:
        if a is ZERO:
            return True
        if len(a.exps) != self.rank:
            return False
        return all(e >= 0 or i in self.inverted for i, e in enumerate(a.exps))

    def check(self, a: MonoidValue) -> None:
        if a is ZERO:
            return
        if len(a.exps) != self.rank:
            raise MonoidError(
                f"exponent vector of length {len(a.exps)} in a monoid on {self.rank} generators"
            )
        if not self.is_valid(a):
            raise MonoidError(f"{a.exps} has a negative exponent outside the inverted set")

    def one(self) -> Monomial:
        return Monomial((0,) * self.rank)

    def gen(self, i: int) -> Monomial:
        e = [0] * self.rank
        e[i] = 1
        return Monomial(tuple(e))

    def monomial(self, *exps: int) -> Monomial:
        m = Monomial(tuple(exps))
        self.check(m)
        return m

    def format(self, a: MonoidValue) -> str:
        if a is ZERO:
            return "0"
        parts = []
        for name, e in zip(self.names, a.exps):
            if e == 1:
                parts.append(name)
            elif e != 0:
                parts.append(f"{name}^{e}")
        return "*".join(parts) if parts else "1"


def mul(ctx: MonoidCtx, a: MonoidValue, b: MonoidValue) -> MonoidValue:
    ctx.check(a)
    ctx.check(b)
    if a is ZERO or b is ZERO:
        return ZERO
    return Monomial(tuple(x + y for x, y in zip(a.exps, b.exps)))


def degree(ctx: MonoidCtx, a: MonoidValue) -> int:
    if not ctx.graded:
        raise MonoidError("degree requested in an ungraded monoid")
    if a is ZERO:
        raise MonoidError("the zero element has no degree")
    ctx.check(a)
    return sum(w * e for w, e in zip(ctx.weights(), a.exps))


def divides(ctx: MonoidCtx, a: MonoidValue, b: MonoidValue) -> tuple[bool, Monomial | None]:
    """Return ``(True, c)`` with ``a * c == b`` if such a ``c`` exists in ``ctx``."""
    if a is ZERO or b is ZERO:
        raise MonoidError("divides is only defined for nonzero elements")
    ctx.check(a)
    ctx.check(b)
    c = Monomial(tuple(y - x for x, y in zip(a.exps, b.exps)))
    if ctx.is_valid(c):
        return True, c
    return False, None


@dataclass(frozen=True)
class Chart:
    """The degree-zero chart monoid A_(x_i) of a free graded monoid.

    ``ctx`` is free on the ratios x_j/x_i (j != i), listed in increasing j.
    """

    ambient: MonoidCtx
    index: int
    ctx: MonoidCtx

    def embed(self, a: MonoidValue) -> tuple[MonoidValue, int]:
        """Send a homogeneous monomial of degree d to (a / x_i^d, d)."""
        if a is ZERO:
            return ZERO, 0
        d = degree(self.ambient, a)
        exps = tuple(e for j, e in enumerate(a.exps) if j != self.index)
        return Monomial(exps), d

    def lift(self, c: MonoidValue, d: int) -> MonoidValue:
        """Inverse of :meth:`embed` on monomials of degree ``d``."""
        if c is ZERO:
            return ZERO
        exps = list(c.exps)
        exps.insert(self.index, d - sum(c.exps))
        m = Monomial(tuple(exps))
        if not self.ambient.is_valid(m):
            raise MonoidError(f"{self.ctx.format(c)} does not lift to degree {d}")
        return m


def free_graded(r: int, prefix: str = "x") -> MonoidCtx:
    """The graded monoid <x_0, ..., x_r> over {0, 1}."""
    return MonoidCtx(tuple(f"{prefix}{i}" for i in range(r + 1)))


def localize_chart(A: MonoidCtx, i: int) -> Chart:
    if A.inverted or not A.graded:
        raise MonoidError("charts are defined for free graded monoids only")
    if not 0 <= i < A.rank:
        raise MonoidError(f"chart index {i} out of range for {A.rank} generators")
    names = tuple(f"{A.names[j]}/{A.names[i]}" for j in range(A.rank) if j != i)
    return Chart(A, i, MonoidCtx(names, graded=False))


def monomials(nvars: int, d: int) -> Iterator[tuple[int, ...]]:
    """Exponent vectors of total degree ``d`` in ``nvars`` variables, lex order."""
    if d < 0:
        return
    if nvars == 1:
        yield (d,)
        return
    for first in range(d, -1, -1):
        for rest in monomials(nvars - 1, d - first):
            yield (first,) + rest


def count_monomials(r: int, n: int) -> int:
    return comb(n + r, r) if n >= 0 else 0


@dataclass(frozen=True, order=True)
class PrimePoint:
    """The prime ideal generated by {x_i : i in support}."""

    support: frozenset[int]

    def label(self, names: tuple[str, ...] | None = None) -> str:
        if not self.support:
            return "(0)"
        idx = sorted(self.support)
        if names is None:
            return "(" + ",".join(f"x{i}" for i in idx) + ")"
        return "(" + ",".join(names[i] for i in idx) + ")"


def mproj_points(r: int) -> list[PrimePoint]:
    """All points of MProj <x_0, ..., x_r>: primes p_T with T a proper subset."""
    if r < 1:
        raise MonoidError("MProj needs at least two generators")
    pts = []
    for size in range(r + 1):
        for t in combinations(range(r + 1), size):
            pts.append(PrimePoint(frozenset(t)))
    return pts


def chart_of_point(p: PrimePoint, r: int) -> int:
    """Smallest chart index i with x_i not in p, i.e. p lies in D_+(x_i)."""
    for i in range(r + 1):
        if i not in p.support:
            return i
    raise MonoidError("the irrelevant ideal is not a point of MProj")
