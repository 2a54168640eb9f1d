"""Magnus rewriting and the constructions built on it.

A Magnus letter ``(j, i, e)`` stands for ``(t^i x_j t^-i)^e``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .freewords import (
    CyclicWord,
    Word,
    WordError,
    char_letter,
    cyclic_reduce,
    exponent_sum,
    fold,
    free_reduce,
    letter_char,
    reduce,
    substitute,
)
from .lattice import magnus_indices


class ExponentSumError(ValueError):
    """The stable generator does not have total exponent zero."""


def b_label(j: int, i: int) -> str:
    return f"{letter_char(j)}_{i}"


@dataclass(frozen=True)
class MagnusRewrite:
    rank: int
    stable: int
    letters: tuple[tuple[int, int, int], ...]
    ranges: dict = field(hash=False)

    def indices(self, j: int) -> list[int]:
        return [i for jj, i, _ in self.letters if jj == j]

    def round_trip(self) -> Word:
        """Substitute ``b_{j,i} = t^i x_j t^-i`` back and freely reduce."""
        t = self.stable
        raw: list[int] = []
        for j, i, e in self.letters:
            tp = [t if i > 0 else -t] * abs(i)
            raw += tp + [j * e] + [-x for x in reversed(tp)]
        return Word(self.rank, tuple(free_reduce(raw)))

    def __str__(self):
        return " ".join(b_label(j, i) + ("^-1" if e < 0 else "") for j, i, e in self.letters) or "1"

    def to_dict(self) -> dict:
        return {
            "stable": letter_char(self.stable),
            "letters": [[letter_char(j), i, e] for j, i, e in self.letters],
            "ranges": {letter_char(j): list(r) for j, r in sorted(self.ranges.items())},
            "rewritten": str(self),
        }


def magnus_rewrite(r: CyclicWord | Word, t: int) -> MagnusRewrite:
    if exponent_sum(r, t) != 0:
        raise ExponentSumError(f"{letter_char(t)} has exponent sum {exponent_sum(r, t)} in {r}")
    level = 0
    out = []
    for y in r.letters:
        if abs(y) == t:
            level += 1 if y > 0 else -1
        else:
            out.append((abs(y), level, 1 if y > 0 else -1))
    ranges = {}
    for j, i, _ in out:
        lo, hi = ranges.get(j, (i, i))
        ranges[j] = (min(lo, i), max(hi, i))
    return MagnusRewrite(r.rank, t, tuple(out), ranges)


@dataclass(frozen=True)
class HnnData:
    """Mapping torus data ``<x_1..x_m, t | t x_i t^-1 = phi(x_i)>``.

    ``stable`` names the stable letter (``"A"`` means a^-1 when extracted
    from a relator); ``labels`` name the base generators.
    """

    base_rank: int
    phi: tuple[Word, ...]
    stable: str = "t"
    labels: tuple[str, ...] | None = None

    def __post_init__(self):
        object.__setattr__(self, "phi", tuple(self.phi))
        if len(self.phi) != self.base_rank:
            raise ValueError("need one image per base generator")
        for w in self.phi:
            if not w:
                raise ValueError("endomorphism images must be nonempty")
            if w.rank != self.base_rank:
                raise ValueError("images must live in the base free group")
        if self.labels is None:
            object.__setattr__(self, "labels", tuple(letter_char(i + 1) for i in range(self.base_rank)))

    @classmethod
    def from_strings(cls, images: Sequence[str], stable: str = "t") -> "HnnData":
        m = len(images)
        return cls(m, tuple(Word.parse(s, m) for s in images), stable)

    def apply(self, w: Word) -> Word:
        return substitute(w, self.phi)

    def is_injective(self) -> bool:
        """Folding check: the images freely generate a subgroup of full rank."""
        return fold(list(self.phi), self.base_rank).subgroup_rank == self.base_rank

    def to_dict(self) -> dict:
        return {
            "base_rank": self.base_rank,
            "phi": [str(w) for w in self.phi],
            "stable": self.stable,
            "labels": list(self.labels),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "HnnData":
        m = d["base_rank"]
        labels = tuple(d["labels"]) if d.get("labels") else None
        return cls(m, tuple(Word.parse(s, m) for s in d["phi"]), d.get("stable", "t"), labels)


#: ``<x, y, t | t x t^-1 = x y, t y t^-1 = y x>``, the Thue endomorphism.
H_T = HnnData.from_strings(["ab", "ba"])
#: ``BS(1,2) = <a, t | t a t^-1 = a^2>``.
BS12 = HnnData.from_strings(["aa"])

NAMED_GROUPS = {"HT": H_T, "BS12": BS12}


def hnn_extract(mr: MagnusRewrite) -> HnnData | None:
    """Eliminate a unique extreme Magnus letter; None when the relator is not of that shape.

    Only one non-stable generator is allowed.  When both extremes are unique
    the minimal one is eliminated.  Base generators are ``b_i`` over the
    remaining window, in increasing index order.
    """
    gens = sorted(mr.ranges)
    if len(gens) != 1:
        return None
    j = gens[0]
    lo, hi = mr.ranges[j]
    idx = [i for _, i, _ in mr.letters]
    for side in ("min", "max"):
        target = lo if side == "min" else hi
        if idx.count(target) != 1:
            continue
        window = range(lo + 1, hi + 1) if side == "min" else range(lo, hi)
        pos = {i: n + 1 for n, i in enumerate(window)}
        m = len(pos)
        k = idx.index(target)
        e = mr.letters[k][2]
        before = [pos[i] * s for _, i, s in mr.letters[:k]]
        after = [pos[i] * s for _, i, s in mr.letters[k + 1:]]
        # X b^e Y = 1  =>  b = X^-1 Y^-1 (e = 1) or Y X (e = -1)
        if e == 1:
            solved = [-x for x in reversed(before)] + [-x for x in reversed(after)]
        else:
            solved = after + before
        stable = letter_char(mr.stable)
        if m == 0:
            return HnnData(0, (), stable if side == "max" else stable.upper())
        solved_w = Word(m, tuple(free_reduce(solved)))
        if side == "min":
            # conjugating by t^-1 lowers indices by one
            phi = [solved_w] + [Word(m, (n,)) for n in range(1, m)]
            stable = stable.upper()
        else:
            phi = [Word(m, (n + 2,)) for n in range(m - 1)] + [solved_w]
        return HnnData(m, tuple(phi), stable, tuple(b_label(j, i) for i in window))
    return None


@dataclass(frozen=True)
class NormalForm:
    """``t^-left * base * t^right``."""

    left: int
    base: Word
    right: int

    def to_dict(self) -> dict:
        return {"k": self.left, "g": str(self.base), "l": self.right}


def parse_hnn_word(h: HnnData, text: str, stable: str = "t") -> Word:
    """Parse a word in the base letters plus ``t``/``T`` for the stable letter."""
    m = h.base_rank
    t = m + 1
    if m >= char_letter(stable.lower()):
        raise WordError(f"stable symbol {stable!r} collides with a base generator")
    out = []
    for ch in text.strip() if text.strip() != "1" else "":
        if ch == stable.lower():
            out.append(t)
        elif ch == stable.upper():
            out.append(-t)
        else:
            x = char_letter(ch)
            if abs(x) > m:
                raise WordError(f"letter {ch!r} is not a base generator")
            out.append(x)
    return reduce(out, t)


def hnn_normal_form(h: HnnData, w: Word) -> NormalForm:
    """Push t to the right and t^-1 to the left; ``w`` uses generator ``m+1`` for t."""
    m = h.base_rank
    t = m + 1
    if w.rank > t:
        raise WordError(f"word rank {w.rank} exceeds base rank + 1")
    left, right = 0, 0
    g = Word.identity(max(m, 1))
    # cache of phi^n on generators
    powers: dict[int, tuple[Word, ...]] = {0: tuple(Word(max(m, 1), (i,)) for i in range(1, m + 1))}

    def phi_power(n: int) -> tuple[Word, ...]:
        if n not in powers:
            prev = phi_power(n - 1)
            powers[n] = tuple(substitute(p, h.phi) for p in prev)
        return powers[n]

    for x in w.letters:
        if x == t:
            right += 1
        elif x == -t:
            if right > 0:
                right -= 1
            else:
                left += 1
                g = substitute(g, h.phi) if m else g
        else:
            img = phi_power(right)[abs(x) - 1]
            g = g * (img if x > 0 else img.inverse())
    return NormalForm(left, g, right)


# -- small cancellation ------------------------------------------------------------

@dataclass(frozen=True)
class SmallCancellationReport:
    words: tuple[CyclicWord, ...]
    max_piece: tuple[int, ...]
    threshold: Fraction

    @property
    def ratios(self) -> tuple[Fraction, ...]:
        return tuple(Fraction(p, len(w)) for p, w in zip(self.max_piece, self.words))

    @property
    def lambda_star(self) -> Fraction:
        return max(self.ratios)

    @property
    def satisfies(self) -> tuple[bool, ...]:
        return tuple(r < self.threshold for r in self.ratios)

    @property
    def holds(self) -> bool:
        return self.lambda_star < self.threshold

    def to_dict(self) -> dict:
        return {
            "words": [str(w) for w in self.words],
            "max_piece": list(self.max_piece),
            "ratios": [str(r) for r in self.ratios],
            "lambda_star": str(self.lambda_star),
            "threshold": str(self.threshold),
            "satisfies": list(self.satisfies),
            "holds": self.holds,
        }


def symmetrized(words: Sequence[CyclicWord]) -> list[tuple[int, tuple[int, ...]]]:
    """Every rotation of every word and of its inverse, tagged by word index.

    Positions are kept apart even when two of them spell the same word, so a
    proper power or a repeated relator produces a full-length piece.
    """
    out = []
    for n, w in enumerate(words):
        for base in (w.letters, w.inverse().letters):
            for k in range(len(base)):
                out.append((n, base[k:] + base[:k]))
    return out


def _lcp(a: str, b: str) -> int:
    """Longest common prefix length, by binary search on slice equality."""
    lo, hi = 0, min(len(a), len(b))
    if a[:hi] == b[:hi]:
        return hi
    while lo + 1 < hi:
        mid = (lo + hi) // 2
        if a[:mid] == b[:mid]:
            lo = mid
        else:
            hi = mid
    return lo


def small_cancellation(words: Sequence[CyclicWord], threshold=Fraction(1, 6)) -> SmallCancellationReport:
    """Longest piece per word over the symmetrized set, via sorted rotations.

    For every position the longest common prefix with any other position is
    attained by a neighbour in sorted order.
    """
    words = tuple(words)
    if not words or any(not w for w in words):
        raise ValueError("need a nonempty collection of nonempty words")
    entries = []
    for n, w in enumerate(words):
        for text in (str(w), str(w.inverse())):
            doubled = text + text
            size = len(text)
            entries.extend((doubled[k:k + size], n) for k in range(size))
    entries.sort()
    best = [0] * len(words)
    for (s1, n1), (s2, n2) in zip(entries, entries[1:]):
        p = _lcp(s1, s2)
        if p > best[n1]:
            best[n1] = p
        if p > best[n2]:
            best[n2] = p
    return SmallCancellationReport(words, tuple(best), Fraction(threshold))


def max_piece_bruteforce(words: Sequence[CyclicWord]) -> list[int]:
    """Pairwise comparison of all symmetrized positions; quadratic in their number."""
    sym = symmetrized(words)
    best = [0] * len(words)
    for a in range(len(sym)):
        na, ra = sym[a]
        for b in range(len(sym)):
            if a == b:
                continue
            rb = sym[b][1]
            n = 0
            while n < len(ra) and n < len(rb) and ra[n] == rb[n]:
                n += 1
            best[na] = max(best[na], n)
    return best


def is_proper_power(w: CyclicWord) -> bool:
    n = len(w)
    return any(n % d == 0 and w.letters == w.letters[d:] + w.letters[:d] for d in range(1, n // 2 + 1))


# -- the two-generator embedding ----------------------------------------------------

def ss_embedding_words(k: int, n: int) -> list[Word]:
    """Images ``w_1..w_k`` of ``x_1..x_k`` in ``F(a, b)``.

    ``w_1 = a b a^2 b ... a^(n+1) b a^-(n+1) b ... a^-1 b``,
    ``w_i = a b^i ... a^n b^i a^-n b^i ... a^-1 b^i`` for ``1 < i < k``,
    ``w_k`` as ``w_i`` but stopping at ``a^-2 b^k``.  At ``n = 1`` the
    descending block of ``w_k`` is empty, so ``w_k = a b^k``.
    """
    if k < 2 or n < 1:
        raise ValueError("need k >= 2 and n >= 1")

    def block(exps, bpow):
        out: list[int] = []
        for e in exps:
            out += [1 if e > 0 else -1] * abs(e) + [2] * bpow
        return Word(2, tuple(out))

    words = [block(list(range(1, n + 2)) + list(range(-(n + 1), 0)), 1)]
    for i in range(2, k):
        words.append(block(list(range(1, n + 1)) + list(range(-n, 0)), i))
    words.append(block(list(range(1, n + 1)) + list(range(-n, -1)), k))
    return words


class EmbeddingError(ValueError):
    """No generator pairing satisfies the embedding hypothesis."""


@dataclass(frozen=True)
class Embedding:
    relator: CyclicWord
    images: tuple[Word, ...]
    n: int
    stable: int
    stable_sign: int
    first: int

    def to_dict(self) -> dict:
        return {
            "relator": str(self.relator),
            "images": [str(w) for w in self.images],
            "n": self.n,
            "stable": letter_char(self.stable * self.stable_sign),
            "first": letter_char(self.first),
        }


def embedding_pairing(r: CyclicWord | Word) -> tuple[int, int, int] | None:
    """First (t, sign, x1) with zero t-sum and a unique maximal Magnus (sign*t)-index of x1."""
    k = r.rank
    for t in range(k, 0, -1):
        if exponent_sum(r, t) != 0:
            continue
        for sign in (1, -1):
            for x1 in range(1, k + 1):
                if x1 == t:
                    continue
                idx = [sign * i for _, i in magnus_indices(r, t, x1)]
                if idx and idx.count(max(idx)) == 1:
                    return t, sign, x1
    return None


def embed(r: CyclicWord, n: int | None = None) -> Embedding:
    """Embed ``<x_1..x_k | r>`` into a two-generator one-relator group.

    Generators are relabelled so the chosen stable generator plays ``x_k``
    and the chosen first generator ``x_1``.  ``n`` defaults to the span of
    all Magnus indices, which keeps the ``x_1`` block's top index strictly
    above every other block.
    """
    k = r.rank
    if k < 2:
        raise EmbeddingError("rank must be at least 2")
    pairing = embedding_pairing(r)
    if pairing is None:
        raise EmbeddingError(f"no generator pairing works for {r}")
    t, sign, x1 = pairing
    if n is None:
        all_idx = [i for x in range(1, k + 1) if x != t for _, i in magnus_indices(r, t, x)]
        n = max(all_idx) - min(all_idx) + 1
    ws = ss_embedding_words(k, n)
    order = [x1] + [x for x in range(1, k + 1) if x not in (x1, t)] + [t]
    images: list[Word] = [None] * k  # type: ignore[list-item]
    for target, g in enumerate(order):
        images[g - 1] = ws[target]
    images[t - 1] = ws[k - 1] if sign == 1 else ws[k - 1].inverse()
    image, _ = cyclic_reduce(substitute(r, images))
    return Embedding(image, tuple(images), n, t, sign, x1)


# -- Baumslag-Pride largeness ---------------------------------------------------------

class LargenessError(ValueError):
    pass


@dataclass(frozen=True)
class LargenessData:
    """Index-n subgroup data for ``<x_1..x_g | u_1..u_r>`` with t = a chosen generator.

    ``relators`` are the ``n*r`` rewritten conjugates over ``s`` (letter 1) and
    ``s_{j,i}`` (letter ``2 + slot(j)*n + i``); ``quotient_relators`` are the
    same after killing ``s_{j,i}`` for ``i < m``.
    """

    g: int
    r: int
    m: int
    n: int
    relators: tuple[Word, ...] = ()
    quotient_relators: tuple[Word, ...] = ()
    labels: tuple[str, ...] = ()
    sources: tuple[tuple[int, int], ...] = ()
    shifted: tuple[Word, ...] = ()
    stable: int = 1

    @property
    def k_generators(self) -> int:
        return (self.g - 1) * (self.n - self.m)

    @property
    def k_relators(self) -> int:
        return self.n * self.r

    @property
    def hbar_generators(self) -> int:
        return self.k_generators + 1

    def to_dict(self) -> dict:
        d = {
            "g": self.g,
            "r": self.r,
            "m": self.m,
            "n": self.n,
            "K_generators": self.k_generators,
            "K_relators": self.k_relators,
            "Hbar_generators": self.hbar_generators,
        }
        if self.relators:
            d["labels"] = list(self.labels)
            d["relators"] = [self.spell(w) for w in self.relators]
            d["quotient_relators"] = [self.spell(w) for w in self.quotient_relators]
        return d

    def spell(self, w: Word) -> str:
        if not w:
            return "1"
        return " ".join(self.labels[abs(x) - 1] + ("^-1" if x < 0 else "") for x in w.letters)

    def substitute_back(self, w: Word) -> Word:
        """``s -> t^n``, ``s_{j,i} -> t^i x_j t^-i`` in the original free group."""
        t = self.stable
        others = [x for x in range(1, self.g + 1) if x != t]
        images = [Word(self.g, (t,) * self.n)]
        for j in others:
            for i in range(self.n):
                images.append(Word(self.g, (t,) * i + (j,) + (-t,) * i))
        return substitute(w, images)


def baumslag_pride(g: int, r: int, m: int) -> LargenessData:
    """Smallest n with ``(g-1)(n-m) >= n*r + 1``."""
    if g - r < 2:
        raise LargenessError(f"need g - r >= 2, got g={g}, r={r}")
    if m < 1:
        raise LargenessError("m must be positive")
    n = m
    while (g - 1) * (n - m) < n * r + 1:
        n += 1
    return LargenessData(g, r, m, n)


def _shift_to_zero(u: Word, t: int, g: int) -> Word:
    """Conjugate by a power of t so the lowest Magnus index becomes 0."""
    if exponent_sum(u, t) != 0:
        raise ExponentSumError(f"{letter_char(t)} has nonzero exponent sum in {u}")
    idx = [i for x in range(1, g + 1) if x != t for _, i in magnus_indices(u, t, x)]
    if not idx:
        raise LargenessError(f"{u} involves only the stable generator")
    lo = min(idx)
    conj = Word(g, (-t,) * lo if lo >= 0 else (t,) * -lo)
    return conj * u.with_rank(g) * conj.inverse()


def index_span(relators: Sequence[Word], t: int = 1) -> int:
    """Number m of consecutive Magnus indices needed once each relator is shifted to start at 0."""
    g = max(u.rank for u in relators)
    return max(max(i for _, i, _ in magnus_rewrite(_shift_to_zero(u, t, g), t).letters) + 1 for u in relators)


def largeness_presentation(relators: Sequence[Word], n: int | None = None, t: int = 1) -> LargenessData:
    """Reidemeister-Schreier rewrite of ``t^c u t^-c`` (c < n) for the kernel of G -> Z/n."""
    relators = [u for u in relators if u]
    if not relators:
        raise LargenessError("need at least one nontrivial relator")
    g = max(u.rank for u in relators)
    shifted = [_shift_to_zero(u, t, g) for u in relators]
    m = index_span(shifted, t)
    if n is None:
        n = baumslag_pride(g, len(relators), m).n
    if n < m:
        raise LargenessError(f"n = {n} is below the index span m = {m}")
    others = [x for x in range(1, g + 1) if x != t]
    slot = {j: s for s, j in enumerate(others)}
    size = 1 + len(others) * n
    labels = ["s"] + [f"s_{letter_char(j)},{i}" for j in others for i in range(n)]

    def gen(j: int, i: int) -> int:
        return 2 + slot[j] * n + i

    out, quotient, sources = [], [], []
    for c in range(n):
        for k, u in enumerate(shifted):
            raw: list[int] = []
            for j, i, e in magnus_rewrite(u, t).letters:
                i += c
                if i < n:
                    raw.append(gen(j, i) * e)
                else:
                    raw += [1, gen(j, i - n) * e, -1]
            w = Word(size, tuple(free_reduce(raw)))
            out.append(w)
            killed = [x for x in w.letters if abs(x) == 1 or (abs(x) - 2) % n >= m]
            quotient.append(Word(size, tuple(free_reduce(killed))))
            sources.append((k, c))
    return LargenessData(
        g, len(relators), m, n, tuple(out), tuple(quotient), tuple(labels), tuple(sources), tuple(shifted), t
    )
