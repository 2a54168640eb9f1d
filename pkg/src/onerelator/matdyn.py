"""2x2 matrices over Z, Z/mZ and small finite fields, and word maps on tuples of them."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import cached_property
from math import gcd
from typing import Iterable, Sequence

from .freewords import Word


class NonUnitError(ArithmeticError):
    """A matrix inverse was needed but its determinant is not a unit."""


@dataclass(frozen=True)
class Integers:
    """The ring Z; only +-1 determinants are invertible."""

    def reduce(self, x: int) -> int:
        return x

    def inverse(self, x: int) -> int:
        if x not in (1, -1):
            raise NonUnitError(f"{x} is not a unit in Z")
        return x

    def add(self, x, y):
        return x + y

    def mul(self, x, y):
        return x * y

    def neg(self, x):
        return -x

    def __str__(self):
        return "Z"


@dataclass(frozen=True)
class ZMod:
    modulus: int

    def __post_init__(self):
        if self.modulus < 2:
            raise ValueError("modulus must be at least 2")

    def reduce(self, x: int) -> int:
        return x % self.modulus

    def inverse(self, x: int) -> int:
        try:
            return pow(x, -1, self.modulus)
        except ValueError:
            raise NonUnitError(f"{x} is not a unit mod {self.modulus}") from None

    def add(self, x, y):
        return (x + y) % self.modulus

    def mul(self, x, y):
        return x * y % self.modulus

    def neg(self, x):
        return -x % self.modulus

    def __str__(self):
        return f"Z/{self.modulus}Z"


# Conway polynomials, coefficients from the constant term up.
CONWAY = {
    (2, 1): (1, 1),
    (2, 2): (1, 1, 1),
    (2, 3): (1, 1, 0, 1),
    (2, 4): (1, 1, 0, 0, 1),
    (3, 1): (1, 1),
    (3, 2): (2, 2, 1),
    (3, 3): (1, 2, 0, 1),
    (5, 1): (3, 1),
    (5, 2): (2, 4, 1),
    (7, 1): (4, 1),
    (7, 2): (3, 6, 1),
}


@dataclass(frozen=True)
class GF:
    """The field with ``q**m`` elements as F_q[x]/(Conway polynomial).

    An element is the integer whose base-q digits are its coefficients, so
    the prime field sits inside as 0..q-1.
    """

    q: int
    m: int = 1

    def __post_init__(self):
        if (self.q, self.m) not in CONWAY:
            raise ValueError(f"no polynomial tabulated for GF({self.q}^{self.m})")

    @property
    def order(self) -> int:
        return self.q ** self.m

    @property
    def poly(self) -> tuple[int, ...]:
        return CONWAY[self.q, self.m]

    def _digits(self, x: int) -> list[int]:
        out = []
        for _ in range(self.m):
            x, d = divmod(x, self.q)
            out.append(d)
        return out

    def _number(self, digits: Sequence[int]) -> int:
        return sum(d * self.q ** i for i, d in enumerate(digits))

    def _polymul(self, x: int, y: int) -> int:
        q, m = self.q, self.m
        a, b = self._digits(x), self._digits(y)
        prod = [0] * (2 * m - 1)
        for i, u in enumerate(a):
            for j, v in enumerate(b):
                prod[i + j] = (prod[i + j] + u * v) % q
        poly = self.poly
        for d in range(len(prod) - 1, m - 1, -1):
            c = prod[d]
            if c:
                for i in range(m + 1):
                    prod[d - m + i] = (prod[d - m + i] - c * poly[i]) % q
        return self._number(prod[:m])

    @cached_property
    def _tables(self):
        n = self.order
        add = [[self._number([(u + v) % self.q for u, v in zip(self._digits(x), self._digits(y))])
                for y in range(n)] for x in range(n)]
        mul = [[self._polymul(x, y) for y in range(n)] for x in range(n)]
        inv = [None] + [next(y for y in range(1, n) if mul[x][y] == 1) for x in range(1, n)]
        neg = [add[x].index(0) for x in range(n)]
        return add, mul, inv, neg

    def reduce(self, x: int) -> int:
        if not 0 <= x < self.order:
            raise ValueError(f"{x} is not an element of GF({self.order})")
        return x

    def add(self, x, y):
        return self._tables[0][x][y]

    def mul(self, x, y):
        return self._tables[1][x][y]

    def neg(self, x):
        return self._tables[3][x]

    def inverse(self, x):
        if x == 0:
            raise NonUnitError("0 has no inverse")
        return self._tables[2][x]

    def power(self, x: int, e: int) -> int:
        out = 1
        while e:
            if e & 1:
                out = self.mul(out, x)
            x = self.mul(x, x)
            e >>= 1
        return out

    def __str__(self):
        return f"GF({self.order})"


@dataclass(frozen=True)
class Mat2:
    """``[[a, b], [c, d]]`` over ``ring``."""

    ring: object
    a: int
    b: int
    c: int
    d: int

    @classmethod
    def of(cls, rows, ring=Integers()) -> "Mat2":
        (a, b), (c, d) = rows
        red = ring.reduce
        return cls(ring, red(a), red(b), red(c), red(d))

    @classmethod
    def identity(cls, ring=Integers()) -> "Mat2":
        return cls(ring, 1, 0, 0, 1)

    def __mul__(self, o: "Mat2") -> "Mat2":
        R = self.ring
        if isinstance(R, (Integers, ZMod)):
            m = getattr(R, "modulus", None)
            a = self.a * o.a + self.b * o.c
            b = self.a * o.b + self.b * o.d
            c = self.c * o.a + self.d * o.c
            d = self.c * o.b + self.d * o.d
            if m is not None:
                a, b, c, d = a % m, b % m, c % m, d % m
            return Mat2(R, a, b, c, d)
        add, mul = R.add, R.mul
        return Mat2(
            R,
            add(mul(self.a, o.a), mul(self.b, o.c)),
            add(mul(self.a, o.b), mul(self.b, o.d)),
            add(mul(self.c, o.a), mul(self.d, o.c)),
            add(mul(self.c, o.b), mul(self.d, o.d)),
        )

    def det(self) -> int:
        R = self.ring
        return R.add(R.mul(self.a, self.d), R.neg(R.mul(self.b, self.c)))

    def adjugate(self) -> "Mat2":
        R = self.ring
        return Mat2(R, self.d, R.neg(self.b), R.neg(self.c), self.a)

    def scale(self, s: int) -> "Mat2":
        R = self.ring
        return Mat2(R, R.mul(s, self.a), R.mul(s, self.b), R.mul(s, self.c), R.mul(s, self.d))

    def inverse(self) -> "Mat2":
        return self.adjugate().scale(self.ring.inverse(self.det()))

    def is_identity(self) -> bool:
        return (self.a, self.b, self.c, self.d) == (1, 0, 0, 1)

    def is_scalar(self) -> bool:
        return self.b == 0 and self.c == 0 and self.a == self.d

    def reduce_mod(self, m: int) -> "Mat2":
        return Mat2.of(self.rows, ZMod(m))

    @property
    def rows(self):
        return ((self.a, self.b), (self.c, self.d))

    @property
    def key(self) -> tuple[int, int, int, int]:
        return (self.a, self.b, self.c, self.d)

    def to_json(self) -> list[list[str]]:
        return [[str(self.a), str(self.b)], [str(self.c), str(self.d)]]

    def __repr__(self):
        return f"Mat2({list(map(list, self.rows))}, {self.ring})"


def residue_matrix(rows, m: int) -> Mat2:
    return Mat2.of(rows, ZMod(m))


MatTuple = tuple  # a tuple of Mat2 over one ring


def reduce_tuple(tup: Sequence[Mat2], m: int) -> tuple[Mat2, ...]:
    return tuple(x.reduce_mod(m) for x in tup)


def eval_word(w: Word, tup: Sequence[Mat2], adjoint_mode: bool = False) -> Mat2:
    """Evaluate ``w`` at a tuple; inverse letters use the inverse, or the bare adjugate in adjoint mode."""
    if len(tup) < w.rank:
        raise ValueError(f"word of rank {w.rank} needs {w.rank} matrices, got {len(tup)}")
    inv: dict[int, Mat2] = {}
    out = Mat2.identity(tup[0].ring) if tup else Mat2.identity()
    for x in w.letters:
        if x > 0:
            out = out * tup[x - 1]
        else:
            g = -x
            if g not in inv:
                inv[g] = tup[g - 1].adjugate() if adjoint_mode else tup[g - 1].inverse()
            out = out * inv[g]
    return out


def _images(phi) -> tuple[Word, ...]:
    return tuple(phi.phi) if hasattr(phi, "phi") else tuple(phi)


def apply_endo(phi, tup: Sequence[Mat2], adjoint_mode: bool = False) -> tuple[Mat2, ...]:
    images = _images(phi)
    if len(images) != len(tup):
        raise ValueError("endomorphism rank and tuple size differ")
    return tuple(eval_word(w, tup, adjoint_mode) for w in images)


U = Mat2.of(((1, 2), (0, 1)))
V = Mat2.of(((1, 0), (2, 1)))


def sanov_seed(k: int) -> tuple[Mat2, ...]:
    """Free tuples in SL_2(Z): (UV, VU) for k = 2, else U^i V U^-i for i = 1..k (k = 1 gives UV)."""
    if k < 1:
        raise ValueError("k must be positive")
    if k == 1:
        return (U * V,)
    if k == 2:
        return (U * V, V * U)
    out = []
    ui = Mat2.identity()
    for _ in range(k):
        ui = ui * U
        out.append(ui * V * ui.inverse())
    return tuple(out)


@dataclass(frozen=True)
class CycleRecord:
    tail: int
    period: int
    point: tuple[Mat2, ...]

    def to_dict(self) -> dict:
        return {"tail": self.tail, "period": self.period, "point": [x.to_json() for x in self.point]}


class StateLimitError(RuntimeError):
    pass


def _tuple_key(tup: Sequence[Mat2]) -> tuple[int, ...]:
    return tuple(v for x in tup for v in x.key)


def find_cycle(phi, start: Sequence[Mat2], limit: int = 10**7, adjoint_mode: bool = False) -> CycleRecord:
    """Exact tail and period of the orbit of ``start``, by remembering every state."""
    seen: dict[tuple[int, ...], int] = {}
    orbit: list[tuple[Mat2, ...]] = []
    cur = tuple(start)
    while True:
        key = _tuple_key(cur)
        if key in seen:
            tail = seen[key]
            return CycleRecord(tail, len(orbit) - tail, orbit[tail])
        if len(orbit) >= limit:
            raise StateLimitError(f"no cycle within {limit} states")
        seen[key] = len(orbit)
        orbit.append(cur)
        cur = apply_endo(phi, cur, adjoint_mode)


def iterate(phi, tup: Sequence[Mat2], times: int, adjoint_mode: bool = False) -> tuple[Mat2, ...]:
    cur = tuple(tup)
    for _ in range(times):
        cur = apply_endo(phi, cur, adjoint_mode)
    return cur


@dataclass(frozen=True)
class HenselReport:
    p: int
    periods: tuple[int, ...]
    tails: tuple[int, ...]

    @property
    def holds(self) -> bool:
        d = self.periods[0]
        return all(t == 0 for t in self.tails) and all(
            per == self.p ** e * d for e, per in enumerate(self.periods)
        )

    @property
    def violations(self) -> list[int]:
        d = self.periods[0]
        return [e + 1 for e, (per, t) in enumerate(zip(self.periods, self.tails)) if t or per != self.p ** e * d]

    def to_dict(self) -> dict:
        return {"p": self.p, "periods": list(self.periods), "tails": list(self.tails), "holds": self.holds}


class NotPeriodicError(ValueError):
    pass


def hensel_check(phi, start: Sequence[Mat2], p: int, max_exponent: int) -> HenselReport:
    """Compare the period mod p^e with ``p^(e-1) * period mod p`` for e = 1..max_exponent."""
    periods, tails = [], []
    for e in range(1, max_exponent + 1):
        rec = find_cycle(phi, reduce_tuple(start, p ** e))
        if e == 1 and rec.tail:
            raise NotPeriodicError(f"start is not periodic mod {p} (tail {rec.tail})")
        periods.append(rec.period)
        tails.append(rec.tail)
    return HenselReport(p, tuple(periods), tuple(tails))


def order_of(x: Mat2, limit: int | None = None) -> int:
    R = x.ring
    if isinstance(R, ZMod) and gcd(x.det(), R.modulus) != 1:
        raise NonUnitError("determinant is not a unit")
    if isinstance(R, (Integers,)) and x.det() not in (1, -1):
        raise NonUnitError("determinant is not a unit")
    if limit is None:
        limit = R.modulus ** 4 if isinstance(R, ZMod) else 10**6
    y, n = x, 1
    while not y.is_identity():
        y = y * x
        n += 1
        if n > limit:
            raise StateLimitError("order exceeds limit")
    return n


# -- quasi-fixed points over finite fields -------------------------------------------

@dataclass(frozen=True)
class QuasiFixedQuery:
    q: int
    m: int = 1
    s: int = 1
    space: str = "SL2"

    @property
    def field(self) -> GF:
        return GF(self.q, self.m)

    @property
    def frobenius_exponent(self) -> int:
        return self.q ** self.s


class SearchTooLarge(ValueError):
    pass


def field_matrices(F: GF, space: str = "SL2") -> list[Mat2]:
    els = range(F.order)
    out = []
    for a, b, c, d in itertools.product(els, repeat=4):
        M = Mat2(F, a, b, c, d)
        if space == "SL2" and M.det() != 1:
            continue
        out.append(M)
    return out


def frobenius(x: Mat2, e: int) -> Mat2:
    F = x.ring
    return Mat2(F, *(F.power(v, e) for v in x.key))


def quasi_fixed_search(query: QuasiFixedQuery, phi, limit: int = 10**8) -> list[tuple[Mat2, ...]]:
    """All tuples with ``phi(tuple)`` equal to the entrywise Q-th power, Q = q^s.

    Inverses use the adjugate (the PGL convention); on SL_2 this is the inverse.
    Results come in lexicographic order of their entries.
    """
    F = query.field
    k = len(_images(phi))
    if query.space not in ("SL2", "M2"):
        raise ValueError(f"unknown search space {query.space}")
    if query.space == "SL2":
        size = (F.order * (F.order ** 2 - 1)) ** k
    else:
        size = F.order ** (4 * k)
    if size > limit:
        raise SearchTooLarge(f"{size} tuples exceed the limit {limit}")
    mats = field_matrices(F, query.space)
    Q = query.frobenius_exponent
    frob = {M.key: frobenius(M, Q) for M in mats}
    found = []
    for tup in itertools.product(mats, repeat=k):
        img = apply_endo(phi, tup, adjoint_mode=True)
        if all(y == frob[x.key] for x, y in zip(tup, img)):
            found.append(tup)
    return found


def entries(tup: Iterable[Mat2]) -> list:
    return [x.to_json() for x in tup]
