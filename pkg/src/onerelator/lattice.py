"""Walks of relators in Z^k, Brown's criterion, and hull goodness.

Everything is exact integer arithmetic.  Walk vertices are read cyclically:
``P_0`` is identified with ``P_L`` after projecting away the endpoint ``M``.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Sequence

from .freewords import CyclicWord, Word, letter_key


class Status(str, Enum):
    ASCENDING = "AscendingHNN"
    NOT_ASCENDING = "NotAscending"
    NEVER_BY_RANK = "NeverByRank"
    INAPPLICABLE = "Inapplicable"


class Inapplicable(ValueError):
    """Geometry undefined: endpoint M = 0, or an unsupported rank."""


@dataclass(frozen=True)
class LatticeWalk:
    rank: int
    points: tuple[tuple[int, ...], ...]

    @property
    def endpoint(self) -> tuple[int, ...]:
        return self.points[-1]

    def __len__(self):
        return len(self.points) - 1


def walk_of(r: CyclicWord | Word) -> LatticeWalk:
    p = [0] * r.rank
    points = [tuple(p)]
    for x in r.letters:
        p[abs(x) - 1] += 1 if x > 0 else -1
        points.append(tuple(p))
    return LatticeWalk(r.rank, tuple(points))


def magnus_indices(w: Word | CyclicWord, t: int, x: int) -> list[tuple[int, int]]:
    """(sign, index) for each occurrence of ``x^±1``; index = t-exponent of the prefix."""
    if t == x:
        raise ValueError("stable generator and indexed generator must differ")
    out = []
    level = 0
    for y in w.letters:
        if abs(y) == t:
            level += 1 if y > 0 else -1
        elif abs(y) == x:
            out.append((1 if y > 0 else -1, level))
    return out


@dataclass(frozen=True)
class BrownVerdict:
    status: Status
    side: str | None = None
    witness: int | None = None

    def to_dict(self) -> dict:
        return {"status": self.status.value, "side": self.side, "witness": self.witness}


def _dot(u: Sequence[int], v: Sequence[int]) -> int:
    return sum(a * b for a, b in zip(u, v))


def _support_values(r: CyclicWord) -> list[int] | None:
    walk = walk_of(r)
    mx, my = walk.endpoint
    if mx == 0 and my == 0:
        return None
    normal = (-my, mx)
    return [_dot(normal, p) for p in walk.points[:-1]]


def _single_vertex_or_edge(idx: list[int], length: int) -> bool:
    if len(idx) == 1:
        return True
    if len(idx) == 2 and length > 2:
        i, j = idx
        return j - i == 1 or (i == 0 and j == length - 1)
    return False


def brown_k2(r: CyclicWord) -> BrownVerdict:
    """Brown's criterion: a support line parallel to OM meets the walk in one vertex or one edge.

    Vertices are walk positions, so a lattice point visited twice counts twice.
    The minimum side is tested first.
    """
    if r.rank != 2:
        raise ValueError("brown_k2 needs a rank-2 relator")
    if not r.letters:
        return BrownVerdict(Status.INAPPLICABLE)
    vals = _support_values(r)
    if vals is None:
        return BrownVerdict(Status.INAPPLICABLE)
    for side, extreme in (("min", min(vals)), ("max", max(vals))):
        idx = [i for i, v in enumerate(vals) if v == extreme]
        if _single_vertex_or_edge(idx, len(vals)):
            return BrownVerdict(Status.ASCENDING, side, idx[0])
    return BrownVerdict(Status.NOT_ASCENDING)


def brown_verdict(r: CyclicWord) -> BrownVerdict:
    if r.rank >= 3:
        return BrownVerdict(Status.NEVER_BY_RANK)
    if r.rank < 2:
        return BrownVerdict(Status.INAPPLICABLE)
    return brown_k2(r)


def _visit_runs(values: Sequence) -> list[tuple[int, int]]:
    """Maximal cyclic runs of equal consecutive values, as (first, last) index pairs.

    A run wrapping past the end is listed last with ``last < first``.
    """
    n = len(values)
    if n == 0:
        return []
    if all(v == values[0] for v in values):
        return [(0, n - 1)]
    starts = [i for i in range(n) if values[i] != values[i - 1]]
    runs = []
    for a, b in zip(starts, starts[1:] + [starts[0] + n]):
        runs.append((a, (b - 1) % n))
    return runs


def bridge_good(r: CyclicWord) -> bool | None:
    """Bridge reading for rank 2: some extreme value of the projection is visited once.

    Consecutive equal values collapse into one visit.  None when M = 0.
    """
    if r.rank != 2:
        raise ValueError("bridge_good needs a rank-2 relator")
    vals = _support_values(r) if r.letters else None
    if vals is None:
        return None
    runs = _visit_runs(vals)
    for extreme in (min(vals), max(vals)):
        if sum(1 for a, _ in runs if vals[a] == extreme) == 1:
            return True
    return False


# -- rank 3 hulls ---------------------------------------------------------------

def _cross(u: Sequence[int], v: Sequence[int]) -> tuple[int, int, int]:
    return (u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0])


def plane_basis(m: Sequence[int]) -> tuple[tuple[int, int, int], tuple[int, int, int]]:
    """Two independent integer vectors spanning the plane orthogonal to ``m``."""
    e = [0, 0, 0]
    e[min(range(3), key=lambda i: abs(m[i]))] = 1
    u = _cross(m, e)
    return u, _cross(m, u)


def convex_hull(points: Sequence[tuple[int, int]]) -> list[tuple[int, int]]:
    """Strict hull vertices (no collinear points), counter-clockwise, exact."""
    pts = sorted(set(points))
    if len(pts) <= 2:
        return pts

    def turn(o, a, b):
        return (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])

    lower: list = []
    for p in pts:
        while len(lower) >= 2 and turn(lower[-2], lower[-1], p) <= 0:
            lower.pop()
        lower.append(p)
    upper: list = []
    for p in reversed(pts):
        while len(upper) >= 2 and turn(upper[-2], upper[-1], p) <= 0:
            upper.pop()
        upper.append(p)
    hull = lower[:-1] + upper[:-1]
    return hull if len(hull) > 1 else pts[:1]


@dataclass(frozen=True)
class HullAnalysis:
    """Projection of a rank-3 walk onto the plane orthogonal to its endpoint.

    ``projected[i]`` is ``|M|^2 P_i - (P_i . M) M`` for the cyclic vertices
    ``P_0..P_{L-1}``.  ``vertices`` are the hull vertices (as projected points,
    sorted), ``multiplicity[j]`` the number of visits of ``vertices[j]`` and
    ``visits[j]`` the (first, last) index runs of those visits in walk order.
    """

    endpoint: tuple[int, int, int]
    projected: tuple[tuple[int, int, int], ...]
    vertices: tuple[tuple[int, int, int], ...]
    multiplicity: tuple[int, ...]
    visits: tuple[tuple[tuple[int, int], ...], ...]

    @property
    def good(self) -> bool:
        return 1 in self.multiplicity

    def to_dict(self) -> dict:
        return {
            "endpoint": list(self.endpoint),
            "hull_vertices": [list(v) for v in self.vertices],
            "multiplicities": list(self.multiplicity),
            "good": self.good,
        }


def project(p: Sequence[int], m: Sequence[int]) -> tuple[int, ...]:
    m2 = _dot(m, m)
    pm = _dot(p, m)
    return tuple(m2 * a - pm * b for a, b in zip(p, m))


def hull_analysis(r: CyclicWord, basis=None) -> HullAnalysis:
    if r.rank != 3:
        raise Inapplicable("hull analysis needs a rank-3 relator")
    walk = walk_of(r)
    m = walk.endpoint
    if not any(m):
        raise Inapplicable("endpoint M = 0")
    u, v = basis if basis is not None else plane_basis(m)
    if _dot(u, m) or _dot(v, m) or not any(_cross(u, v)):
        raise ValueError("basis must be two independent vectors orthogonal to M")
    projected = tuple(project(p, m) for p in walk.points[:-1])
    coords = [(_dot(q, u), _dot(q, v)) for q in projected]
    back = dict(zip(coords, projected))
    hull = sorted(back[c] for c in convex_hull(coords))
    runs = _visit_runs(projected)
    visits = tuple(tuple(run for run in runs if projected[run[0]] == h) for h in hull)
    return HullAnalysis(
        endpoint=m,
        projected=projected,
        vertices=tuple(hull),
        multiplicity=tuple(len(vs) for vs in visits),
        visits=visits,
    )


def is_good(r: CyclicWord) -> bool:
    """Rank 2: Brown's condition holds.  Rank 3: some hull vertex is visited once."""
    if r.rank == 2:
        verdict = brown_k2(r)
        if verdict.status is Status.INAPPLICABLE:
            raise Inapplicable("endpoint M = 0")
        return verdict.status is Status.ASCENDING
    if r.rank == 3:
        return hull_analysis(r).good
    raise Inapplicable(f"goodness is defined for rank 2 and 3, not {r.rank}")


class NoGoodInsertion(RuntimeError):
    pass


def commutator_candidates(rank: int) -> list[tuple[int, int]]:
    """Ordered letter pairs (u, w) on distinct generators, lexicographic in a < A < b < B < ..."""
    letters = sorted([g for g in range(1, rank + 1)] + [-g for g in range(1, rank + 1)], key=letter_key)
    return [(u, w) for u in letters for w in letters if abs(u) != abs(w)]


def make_good(r: CyclicWord, vertex: int | Sequence[int]) -> CyclicWord:
    """Insert a commutator ``u w u^-1 w^-1`` right after the second visit of a hull vertex.

    ``vertex`` is an index into ``hull_analysis(r).vertices`` or the projected
    point itself.  The first candidate pair (in ``commutator_candidates``
    order) that keeps the word cyclically reduced and makes it good wins.
    """
    ha = hull_analysis(r)
    if ha.good:
        raise ValueError("relator is already good")
    j = vertex if isinstance(vertex, int) else ha.vertices.index(tuple(vertex))
    runs = ha.visits[j]
    if len(runs) < 2:
        raise ValueError("vertex is visited only once")
    pos = runs[1][1]
    letters = r.letters
    n = len(letters)
    # inserting at walk vertex P_pos puts the square between letters pos-1 and pos
    prev, nxt = letters[pos - 1], letters[pos % n]
    for u, w in commutator_candidates(r.rank):
        if prev == -u or nxt == w:
            continue
        new = letters[:pos] + (u, w, -u, -w) + letters[pos:]
        if len(new) >= 2 and new[0] == -new[-1]:
            continue
        cand = CyclicWord(r.rank, new)
        if hull_analysis(cand).good:
            return cand
    raise NoGoodInsertion(f"no commutator insertion makes {r} good at vertex {j}")
