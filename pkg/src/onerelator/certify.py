"""Residual-finiteness certificates for ascending HNN extensions of free groups.

A tuple ``X`` of matrices with period ``l`` under ``phi`` gives a homomorphism
into ``V wr Z/l``:

    x_j -> ((X_j, phi(X)_j, ..., phi^(l-1)(X)_j), 0),    t -> ((1, ..., 1), 1).

Multiplication is ``(u, s)(v, r) = (u * shift(v, s), s + r)`` with
``shift(v, s)_i = v_{(i + s) mod l}``, which makes ``t g t^-1`` shift the
vector one step forward, i.e. apply ``phi`` once.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from math import gcd
from typing import Sequence

from .freewords import Word, WordError
from .magnus import HnnData
from .matdyn import (
    Mat2,
    NonUnitError,
    ZMod,
    apply_endo,
    eval_word,
    find_cycle,
    reduce_tuple,
    sanov_seed,
)

DEFAULT_PRIMES = (5, 7, 11, 13)
DEFAULT_MAX_EXPONENT = 6


class CertificateError(ValueError):
    pass


@dataclass(frozen=True)
class WreathElement:
    vector: tuple[Mat2, ...]
    shift: int

    @property
    def period(self) -> int:
        return len(self.vector)

    @classmethod
    def identity(cls, ring, period: int) -> "WreathElement":
        return cls(tuple(Mat2.identity(ring) for _ in range(period)), 0)

    def __mul__(self, o: "WreathElement") -> "WreathElement":
        n = self.period
        if o.period != n:
            raise CertificateError("wreath elements of different periods")
        s = self.shift
        vec = tuple(self.vector[i] * o.vector[(i + s) % n] for i in range(n))
        return WreathElement(vec, (s + o.shift) % n)

    def inverse(self) -> "WreathElement":
        n = self.period
        s = self.shift
        inv = [x.inverse() for x in self.vector]
        return WreathElement(tuple(inv[(i - s) % n] for i in range(n)), (-s) % n)

    def is_identity(self) -> bool:
        return self.shift == 0 and all(x.is_identity() for x in self.vector)

    def to_dict(self) -> dict:
        return {"vector": [x.to_json() for x in self.vector], "shift": self.shift}

    @classmethod
    def from_dict(cls, d: dict, ring) -> "WreathElement":
        vec = tuple(Mat2.of([[int(v) for v in row] for row in m], ring) for m in d["vector"])
        return cls(vec, int(d["shift"]))


def wreath_eval(w: Word, images: Sequence[WreathElement]) -> WreathElement:
    first = images[0]
    out = WreathElement.identity(first.vector[0].ring, first.period)
    inverses: dict[int, WreathElement] = {}
    for x in w.letters:
        g = abs(x)
        if x > 0:
            out = out * images[g - 1]
        else:
            if g not in inverses:
                inverses[g] = images[g - 1].inverse()
            out = out * inverses[g]
    return out


def wreath_build(h: HnnData, point: Sequence[Mat2], period: int) -> tuple[WreathElement, ...]:
    """Images of ``x_1..x_m`` then ``t``; the orbit of ``point`` must close after ``period`` steps."""
    orbit = [tuple(point)]
    for _ in range(period):
        orbit.append(apply_endo(h, orbit[-1]))
    if orbit[period] != orbit[0]:
        raise CertificateError(f"tuple is not periodic with period {period}")
    ring = point[0].ring
    images = [WreathElement(tuple(orbit[i][j] for i in range(period)), 0) for j in range(h.base_rank)]
    images.append(WreathElement(tuple(Mat2.identity(ring) for _ in range(period)), 1 % period))
    images = tuple(images)
    if not relations_hold(h, images):
        raise CertificateError("HNN relations fail on the wreath images")
    return images


def relations_hold(h: HnnData, images: Sequence[WreathElement]) -> bool:
    t = images[-1]
    t_inv = t.inverse()
    base = images[:-1]
    for j, img in enumerate(h.phi):
        if t * base[j] * t_inv != wreath_eval(img, base):
            return False
    return True


@dataclass(frozen=True)
class Certificate:
    hnn: HnnData
    word: Word
    p: int
    e: int
    period: int
    point: tuple[Mat2, ...]
    images: tuple[WreathElement, ...]
    gamma_w: WreathElement

    @property
    def modulus(self) -> int:
        return self.p ** self.e

    def to_dict(self, verified: bool | None = None) -> dict:
        return {
            "hnn": self.hnn.to_dict(),
            "word": str(self.word),
            "p": self.p,
            "e": self.e,
            "ell": self.period,
            "tuple": [x.to_json() for x in self.point],
            "images": [x.to_dict() for x in self.images],
            "gamma_w": self.gamma_w.to_dict(),
            "verified": verify(self) if verified is None else verified,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Certificate":
        h = HnnData.from_dict(d["hnn"])
        ring = ZMod(int(d["p"]) ** int(d["e"]))
        point = tuple(Mat2.of([[int(v) for v in row] for row in m], ring) for m in d["tuple"])
        return cls(
            hnn=h,
            word=Word.parse(d["word"], h.base_rank),
            p=int(d["p"]),
            e=int(d["e"]),
            period=int(d["ell"]),
            point=point,
            images=tuple(WreathElement.from_dict(x, ring) for x in d["images"]),
            gamma_w=WreathElement.from_dict(d["gamma_w"], ring),
        )


def verify(c: Certificate) -> bool:
    """Recheck a certificate from its stored images only.

    The images must be invertible elements of ``SL_2(Z/p^e) wr Z/l`` (or GL_2), satisfy
    every relation ``t x_j t^-1 = phi(x_j)``, and send the word to the stored,
    non-identity ``gamma_w``.
    """
    try:
        m = c.modulus
        if len(c.images) != c.hnn.base_rank + 1:
            return False
        for img in c.images + (c.gamma_w,):
            if img.period != c.period or not 0 <= img.shift < c.period:
                return False
            for x in img.vector:
                if not isinstance(x.ring, ZMod) or x.ring.modulus != m:
                    return False
                if any(not 0 <= v < m for v in x.key) or gcd(x.det(), m) != 1:
                    return False
        if not relations_hold(c.hnn, c.images):
            return False
        gw = wreath_eval(c.word, c.images[:-1])
        return gw == c.gamma_w and not gw.is_identity()
    except (CertificateError, NonUnitError, WordError, ValueError):
        return False


def nontriviality_modulus(w: Word, seed: Sequence[Mat2], p: int) -> int:
    """Smallest e with ``w(seed) != I mod p^e``, from the exact integer value."""
    if not w:
        raise WordError("the empty word is trivial")
    W = eval_word(w, seed)
    g = gcd(W.a - 1, W.b, W.c, W.d - 1)
    if g == 0:
        raise CertificateError(f"{w} evaluates to the identity at the seed")
    e = 1
    while g % p == 0:
        g //= p
        e += 1
    return e


@dataclass(frozen=True)
class CertifyFailure:
    word: Word
    attempts: tuple[tuple[int, int, str], ...] = field(default_factory=tuple)

    @property
    def reason(self) -> str:
        reasons = {r for _, _, r in self.attempts}
        if reasons == {"word dies on cycle"}:
            return "word dies on the cycle for every modulus tried"
        return "no modulus produced a usable periodic point"

    def to_dict(self) -> dict:
        return {
            "word": str(self.word),
            "certified": False,
            "reason": self.reason,
            "attempts": [{"p": p, "e": e, "obstruction": r} for p, e, r in self.attempts],
        }


def certify(
    h: HnnData,
    w: Word,
    primes: Sequence[int] = DEFAULT_PRIMES,
    max_exponent: int = DEFAULT_MAX_EXPONENT,
    seed: Sequence[Mat2] | None = None,
) -> Certificate | CertifyFailure:
    """Certify ``w != 1`` by a finite wreath-product quotient.

    For each prime, starting at the least exponent where ``w(seed)`` survives,
    the seed is reduced mod ``p^e`` and its orbit under ``phi`` computed.  If the
    seed is not itself periodic the on-cycle point of its orbit is used
    instead.  Failures come back as a value, not an exception.
    """
    if h.base_rank < 2:
        raise ValueError("certificates need base rank at least 2")
    w = w.with_rank(h.base_rank)
    if not w:
        raise WordError("the empty word is trivial")
    seed = tuple(sanov_seed(h.base_rank) if seed is None else seed)
    attempts = []
    for p in primes:
        e0 = nontriviality_modulus(w, seed, p)
        for e in range(e0, max_exponent + 1):
            start = reduce_tuple(seed, p ** e)
            rec = find_cycle(h, start)
            point = start if rec.tail == 0 else rec.point
            if eval_word(w, point).is_identity():
                attempts.append((p, e, "word dies on cycle"))
                if rec.tail:
                    break
                continue
            images = wreath_build(h, point, rec.period)
            gw = wreath_eval(w, images[:-1])
            cert = Certificate(h, w, p, e, rec.period, point, images, gw)
            if verify(cert):
                return cert
            attempts.append((p, e, "verification failed"))
        else:
            if e0 > max_exponent:
                attempts.append((p, e0, "exponent cap"))
    return CertifyFailure(w, tuple(attempts))
