"""Words in a free group of finite rank.

Letters are non-zero integers: ``g`` is the generator ``x_g`` and ``-g`` its
inverse.  The ASCII form uses ``a..z`` for ``x_1..x_26`` and ``A..Z`` for the
inverses; the empty word prints as ``"1"``.
"""

from __future__ import annotations

import bisect
import random
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Sequence

MAX_RANK = 26


class WordError(ValueError):
    """Malformed word: bad character, letter outside the rank, or not reduced."""


def letter_char(letter: int) -> str:
    g = abs(letter)
    if not 1 <= g <= MAX_RANK:
        raise WordError(f"letter {letter} has no ASCII form")
    c = chr(ord("a") + g - 1)
    return c if letter > 0 else c.upper()


def char_letter(c: str) -> int:
    if "a" <= c <= "z":
        return ord(c) - ord("a") + 1
    if "A" <= c <= "Z":
        return -(ord(c) - ord("A") + 1)
    raise WordError(f"bad letter {c!r}")


def letter_key(letter: int) -> int:
    """Sort key realising the order a < A < b < B < ..."""
    return 2 * (abs(letter) - 1) + (letter < 0)


def parse_letters(text: str) -> list[int]:
    text = text.strip()
    if text in ("", "1"):
        return []
    return [char_letter(c) for c in text]


def letters_string(letters: Sequence[int]) -> str:
    if not letters:
        return "1"
    return "".join(letter_char(x) for x in letters)


def _check_rank(letters: Iterable[int], rank: int) -> None:
    for x in letters:
        if x == 0 or abs(x) > rank:
            raise WordError(f"letter {x} outside rank {rank}")


def free_reduce(letters: Iterable[int]) -> list[int]:
    out: list[int] = []
    for x in letters:
        if out and out[-1] == -x:
            out.pop()
        else:
            out.append(x)
    return out


def inverse_letters(letters: Sequence[int]) -> tuple[int, ...]:
    return tuple(-x for x in reversed(letters))


@dataclass(frozen=True)
class Word:
    """A freely reduced word over ``x_1..x_rank``."""

    rank: int
    letters: tuple[int, ...] = ()

    def __post_init__(self):
        if self.rank < 1:
            raise WordError("rank must be positive")
        letters = tuple(self.letters)
        object.__setattr__(self, "letters", letters)
        _check_rank(letters, self.rank)
        for u, v in zip(letters, letters[1:]):
            if u == -v:
                raise WordError(f"{letters_string(letters)} is not freely reduced")

    @classmethod
    def parse(cls, text: str, rank: int | None = None) -> "Word":
        """Parse and freely reduce an ASCII word; rank defaults to the highest generator used."""
        letters = parse_letters(text)
        if rank is None:
            rank = max((abs(x) for x in letters), default=1)
        return reduce(letters, rank)

    @classmethod
    def identity(cls, rank: int) -> "Word":
        return cls(rank, ())

    def __str__(self):
        return letters_string(self.letters)

    def __repr__(self):
        return f"Word({str(self)!r}, rank={self.rank})"

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]

    def __bool__(self):
        return bool(self.letters)

    def __mul__(self, other: "Word") -> "Word":
        if not isinstance(other, Word):
            return NotImplemented
        rank = max(self.rank, other.rank)
        a, b = list(self.letters), other.letters
        j = 0
        while a and j < len(b) and a[-1] == -b[j]:
            a.pop()
            j += 1
        return Word(rank, tuple(a) + b[j:])

    def __pow__(self, n: int) -> "Word":
        base = self if n >= 0 else self.inverse()
        out = Word.identity(self.rank)
        for _ in range(abs(n)):
            out = out * base
        return out

    def inverse(self) -> "Word":
        return Word(self.rank, inverse_letters(self.letters))

    def with_rank(self, rank: int) -> "Word":
        return Word(rank, self.letters)

    def is_cyclically_reduced(self) -> bool:
        return len(self.letters) < 2 or self.letters[0] != -self.letters[-1]


def least_rotation(letters: Sequence[int]) -> int:
    """Start index of the lexicographically least rotation (Booth's algorithm)."""
    s = [letter_key(x) for x in letters]
    n = len(s)
    if n == 0:
        return 0
    s = s + s
    f = [-1] * len(s)
    k = 0
    for j in range(1, len(s)):
        sj = s[j]
        i = f[j - k - 1]
        while i != -1 and sj != s[k + i + 1]:
            if sj < s[k + i + 1]:
                k = j - i - 1
            i = f[i]
        if sj != s[k + i + 1]:
            if sj < s[k]:
                k = j
            f[j - k] = -1
        else:
            f[j - k] = i + 1
    return k % n


@dataclass(frozen=True, eq=False)
class CyclicWord:
    """A cyclically reduced word, compared up to rotation.

    ``letters`` keeps the rotation it was built from, since Magnus indices and
    walks are read from it; equality and hashing use the least rotation.
    """

    rank: int
    letters: tuple[int, ...] = ()
    _canon: list = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        Word(self.rank, self.letters)
        letters = tuple(self.letters)
        object.__setattr__(self, "letters", letters)
        if len(letters) >= 2 and letters[0] == -letters[-1]:
            raise WordError(f"{letters_string(letters)} is not cyclically reduced")

    @classmethod
    def parse(cls, text: str, rank: int | None = None) -> "CyclicWord":
        """Parse a word and cyclically reduce it (the conjugator is dropped)."""
        return cyclic_reduce(Word.parse(text, rank))[0]

    @property
    def canonical(self) -> tuple[int, ...]:
        if not self._canon:
            k = least_rotation([letter_key(x) for x in self.letters])
            self._canon.append(self.letters[k:] + self.letters[:k])
        return self._canon[0]

    def rotate(self, k: int) -> "CyclicWord":
        if not self.letters:
            return self
        k %= len(self.letters)
        return CyclicWord(self.rank, self.letters[k:] + self.letters[:k])

    def canonical_word(self) -> "CyclicWord":
        return CyclicWord(self.rank, self.canonical)

    def as_word(self) -> Word:
        return Word(self.rank, self.letters)

    def inverse(self) -> "CyclicWord":
        return CyclicWord(self.rank, inverse_letters(self.letters))

    def __eq__(self, other):
        if not isinstance(other, CyclicWord):
            return NotImplemented
        return self.rank == other.rank and self.canonical == other.canonical

    def __hash__(self):
        return hash((self.rank, self.canonical))

    def __str__(self):
        return letters_string(self.letters)

    def __repr__(self):
        return f"CyclicWord({str(self)!r}, rank={self.rank})"

    def __len__(self):
        return len(self.letters)

    def __iter__(self):
        return iter(self.letters)

    def __getitem__(self, i):
        return self.letters[i]


def reduce(raw: Iterable[int], rank: int) -> Word:
    raw = list(raw)
    _check_rank(raw, rank)
    return Word(rank, tuple(free_reduce(raw)))


def cyclic_reduce(w: Word) -> tuple[CyclicWord, Word]:
    """Return ``(c, u)`` with ``w = u c u^-1`` and ``c`` cyclically reduced."""
    letters = w.letters
    i, j = 0, len(letters)
    while j - i >= 2 and letters[i] == -letters[j - 1]:
        i += 1
        j -= 1
    return CyclicWord(w.rank, letters[i:j]), Word(w.rank, letters[:i])


def exponent_sum(w: Word | CyclicWord, generator: int) -> int:
    if not 1 <= generator <= w.rank:
        raise WordError(f"generator {generator} outside rank {w.rank}")
    return sum((x > 0) - (x < 0) for x in w.letters if abs(x) == generator)


def exponent_vector(w: Word | CyclicWord) -> tuple[int, ...]:
    v = [0] * w.rank
    for x in w.letters:
        v[abs(x) - 1] += 1 if x > 0 else -1
    return tuple(v)


def substitute(w: Word | CyclicWord, images: Sequence[Word]) -> Word:
    """Image of ``w`` under the homomorphism ``x_i -> images[i-1]``."""
    if len(images) != w.rank:
        raise WordError(f"need {w.rank} images, got {len(images)}")
    rank = max(im.rank for im in images)
    inv = [im.inverse() for im in images]
    out = Word.identity(rank)
    for x in w.letters:
        out = out * (images[x - 1] if x > 0 else inv[-x - 1])
    return out


# -- counting and sampling ---------------------------------------------------

def count_words(rank: int, length: int, cyclic: bool = False) -> int:
    """Number of freely (or cyclically) reduced words of exactly this length.

    Transfer-matrix count over the last letter; in the cyclic case the first
    letter is fixed and the final letter may not be its inverse.
    """
    if length < 0:
        raise ValueError("length must be non-negative")
    if length == 0:
        return 1
    alphabet = [g for g in range(1, rank + 1)] + [-g for g in range(1, rank + 1)]
    if not cyclic:
        vec = {x: 1 for x in alphabet}
        for _ in range(length - 1):
            total = sum(vec.values())
            vec = {x: total - vec[-x] for x in alphabet}
        return sum(vec.values())
    count = 0
    for first in alphabet:
        vec = {x: int(x == first) for x in alphabet}
        for _ in range(length - 1):
            total = sum(vec.values())
            vec = {x: total - vec[-x] for x in alphabet}
        count += sum(n for x, n in vec.items() if x != -first)
    return count


@lru_cache(maxsize=64)
def _completions(rank: int, length: int) -> tuple[tuple[int, int, int], ...]:
    """Cyclic completion counts ``(N_Y, N_F, N_O)`` for 0..length-1 letters to go.

    Relative to the first letter f: Y is the letter f^-1 (forbidden last),
    F is f itself, O any other letter.
    """
    o = 2 * rank - 2
    table = [(0, 1, 1)]
    for _ in range(1, length):
        y, f, x = table[-1]
        table.append((y + o * x, f + o * x, y + f + (o - 1) * x))
    return tuple(table)


@lru_cache(maxsize=64)
def _length_weights(rank: int, max_length: int, cyclic: bool) -> tuple[list[int], int]:
    cum, total = [], 0
    for n in range(1, max_length + 1):
        total += count_words(rank, n, cyclic) if cyclic else 2 * rank * (2 * rank - 1) ** (n - 1)
        cum.append(total)
    return cum, total


def _sample_cyclic(rank: int, length: int, rng: random.Random) -> list[int]:
    table = _completions(rank, length)
    alphabet = [g for g in range(1, rank + 1)] + [-g for g in range(1, rank + 1)]
    first = alphabet[rng.randrange(2 * rank)]
    y = -first
    out = [first]
    for pos in range(1, length):
        ny, nf, no = table[length - 1 - pos]
        prev_inv = -out[-1]
        candidates = [x for x in alphabet if x != prev_inv]
        weights = [ny if x == y else nf if x == first else no for x in candidates]
        r = rng.randrange(sum(weights))
        for x, wt in zip(candidates, weights):
            if r < wt:
                out.append(x)
                break
            r -= wt
    return out


def sample_exact(rank: int, length: int, rng: random.Random, cyclic: bool = True) -> Word | CyclicWord:
    """Uniform freely (or cyclically) reduced word of exactly ``length`` letters."""
    if length < 1:
        raise ValueError("length must be at least 1")
    if cyclic:
        return CyclicWord(rank, tuple(_sample_cyclic(rank, length, rng)))
    return Word(rank, tuple(_sample_reduced_fixed(rank, length, rng)))


def _sample_reduced_fixed(rank: int, length: int, rng: random.Random) -> list[int]:
    alphabet = [g for g in range(1, rank + 1)] + [-g for g in range(1, rank + 1)]
    out = [alphabet[rng.randrange(2 * rank)]]
    for _ in range(length - 1):
        candidates = [x for x in alphabet if x != -out[-1]]
        out.append(candidates[rng.randrange(len(candidates))])
    return out


def sample(rank: int, max_length: int, model: int, rng: random.Random, raw: bool = False) -> Word | CyclicWord:
    """Uniform random relator of length 1..max_length.

    Model 1 draws a freely reduced word, model 2 a cyclically reduced one.
    With ``raw`` (model 1 only) an unreduced letter string of uniform length
    is drawn and then reduced; the result may be shorter, or empty.
    """
    if max_length < 1:
        raise ValueError("max_length must be at least 1")
    if model not in (1, 2):
        raise ValueError(f"unknown model {model}")
    if raw:
        if model != 1:
            raise ValueError("raw sampling is a model 1 option")
        weights = [(2 * rank) ** n for n in range(1, max_length + 1)]
        n = rng.choices(range(1, max_length + 1), cum_weights=list(_accumulate(weights)))[0]
        letters = []
        for _ in range(n):
            x = rng.randrange(2 * rank)
            letters.append(x // 2 + 1 if x % 2 == 0 else -(x // 2 + 1))
        return reduce(letters, rank)
    cyclic = model == 2
    cum, total = _length_weights(rank, max_length, cyclic)
    n = bisect.bisect_right(cum, rng.randrange(total)) + 1
    return sample_exact(rank, n, rng, cyclic=cyclic)


def _accumulate(xs):
    t = 0
    for x in xs:
        t += x
        yield t


def trial_rng(seed: int, index: int) -> random.Random:
    """Per-trial stream: Mersenne Twister seeded with ``seed XOR index``."""
    return random.Random(seed ^ index)


# -- Stallings folding ---------------------------------------------------------

@dataclass(frozen=True)
class SubgroupGraph:
    """Folded graph of a subgroup of ``F_rank``; state 0 is the base point.

    ``edges[s]`` maps a letter to the state reached by reading it at ``s``;
    inverse letters are stored, so reading works in both directions.
    """

    rank: int
    edges: tuple[dict, ...]

    @property
    def num_states(self) -> int:
        return len(self.edges)

    @property
    def num_edges(self) -> int:
        return sum(1 for out in self.edges for x in out if x > 0)

    @property
    def subgroup_rank(self) -> int:
        return self.num_edges - self.num_states + 1


def fold(generators: Sequence[Word], rank: int | None = None) -> SubgroupGraph:
    if rank is None:
        rank = max((w.rank for w in generators), default=1)
    parent = [0]
    edges: list[tuple[int, int, int]] = []

    def new_state():
        parent.append(len(parent))
        return len(parent) - 1

    for w in generators:
        if not w:
            continue
        _check_rank(w.letters, rank)
        cur = 0
        for i, x in enumerate(w.letters):
            nxt = 0 if i == len(w) - 1 else new_state()
            edges.append((cur, x, nxt) if x > 0 else (nxt, -x, cur))
            cur = nxt

    def find(s):
        while parent[s] != s:
            parent[s] = parent[parent[s]]
            s = parent[s]
        return s

    def union(s, t):
        s, t = find(s), find(t)
        if s != t:
            # keep the smaller label so the base point stays 0
            if t < s:
                s, t = t, s
            parent[t] = s

    changed = True
    while changed:
        changed = False
        table: dict[tuple[int, int], int] = {}
        for u, g, v in edges:
            u, v = find(u), find(v)
            for key, target in (((u, g), v), ((v, -g), u)):
                seen = table.get(key)
                if seen is None:
                    table[key] = target
                elif find(seen) != find(target):
                    union(seen, target)
                    changed = True

    roots = sorted({find(s) for s in range(len(parent))})
    index = {r: i for i, r in enumerate(roots)}
    out: list[dict] = [dict() for _ in roots]
    for u, g, v in edges:
        u, v = index[find(u)], index[find(v)]
        out[u][g] = v
        out[v][-g] = u
    return SubgroupGraph(rank, tuple(out))


def membership(graph: SubgroupGraph, w: Word) -> bool:
    state = 0
    for x in w.letters:
        state = graph.edges[state].get(x)
        if state is None:
            return False
    return state == 0
