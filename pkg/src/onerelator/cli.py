"""Command line front end; every subcommand prints JSON.

Exit status: 0 on success (including negative answers such as NotAscending),
1 on a domain failure, 2 on a usage error or malformed word.
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import certify as cert_mod
from . import experiments, lattice, magnus, matdyn
from .freewords import CyclicWord, Word, WordError, sample, sample_exact, trial_rng


class DomainFailure(Exception):
    """Well-formed input for which the operation has no answer."""

    def __init__(self, message: str, payload: dict | None = None):
        super().__init__(message)
        self.payload = payload or {}


class UsageError(Exception):
    pass


def _cyclic(text: str, rank: int) -> CyclicWord:
    w = Word.parse(text, rank)
    if not w.is_cyclically_reduced():
        raise WordError(f"{text} is not cyclically reduced")
    return CyclicWord(rank, w.letters)


def _generator(text: str, rank: int) -> int:
    if len(text) != 1 or not text.islower():
        raise UsageError(f"generator must be a single lower-case letter, got {text!r}")
    g = ord(text) - ord("a") + 1
    if g > rank:
        raise UsageError(f"generator {text} outside rank {rank}")
    return g


def _group(args) -> magnus.HnnData:
    if getattr(args, "phi", None):
        return magnus.HnnData.from_strings(args.phi.split(","))
    name = getattr(args, "group", None) or "HT"
    try:
        return magnus.NAMED_GROUPS[name]
    except KeyError:
        raise UsageError(f"unknown group {name!r}; known: {', '.join(magnus.NAMED_GROUPS)}") from None


# -- subcommands: each takes (args, word_text) and returns a JSON-ready dict -----------

def cmd_sample(args, _text=None):
    out = []
    for i in range(args.count):
        rng = trial_rng(args.seed, i)
        if args.exact:
            w = sample_exact(args.rank, args.length, rng, cyclic=args.model == 2)
        else:
            w = sample(args.rank, args.length, args.model, rng, raw=args.raw)
        out.append(str(w))
    return {"rank": args.rank, "model": args.model, "seed": args.seed, "words": out}


def cmd_brown(args, text):
    r = _cyclic(text, args.rank)
    d = {"word": text, **lattice.brown_verdict(r).to_dict()}
    if r.rank == 2:
        d["bridge_good"] = lattice.bridge_good(r)
    return d


def cmd_goodness(args, text):
    r = _cyclic(text, args.rank)
    try:
        if r.rank == 2:
            return {"word": text, "good": lattice.is_good(r)}
        ha = lattice.hull_analysis(r)
    except lattice.Inapplicable as exc:
        raise DomainFailure(str(exc)) from None
    d = {"word": text, **ha.to_dict()}
    if args.make_good is not None:
        try:
            d["repaired"] = str(lattice.make_good(r, args.make_good))
        except (ValueError, IndexError, lattice.NoGoodInsertion) as exc:
            raise DomainFailure(str(exc)) from None
    return d


def cmd_magnus(args, text):
    r = _cyclic(text, args.rank)
    try:
        mr = magnus.magnus_rewrite(r, _generator(args.stable, args.rank))
    except magnus.ExponentSumError as exc:
        raise DomainFailure(str(exc)) from None
    return {"word": text, **mr.to_dict()}


def cmd_extract(args, text):
    r = _cyclic(text, args.rank)
    try:
        mr = magnus.magnus_rewrite(r, _generator(args.stable, args.rank))
    except magnus.ExponentSumError as exc:
        raise DomainFailure(str(exc)) from None
    h = magnus.hnn_extract(mr)
    if h is None:
        return {"word": text, "status": "NotAscending"}
    return {"word": text, "status": "AscendingHNN", "hnn": h.to_dict()}


def cmd_normalform(args, text):
    h = _group(args)
    w = magnus.parse_hnn_word(h, text)
    return {"word": text, **magnus.hnn_normal_form(h, w).to_dict()}


def cmd_smallcancel(args, _text=None):
    words = [_cyclic(t, args.rank) for t in args.word]
    return magnus.small_cancellation(words, Fraction(args.threshold)).to_dict()


def cmd_embed(args, text):
    r = _cyclic(text, args.rank)
    try:
        e = magnus.embed(r, args.n)
    except magnus.EmbeddingError as exc:
        raise DomainFailure(str(exc)) from None
    d = e.to_dict()
    d["brown"] = lattice.brown_verdict(e.relator).to_dict()
    return {"word": text, **d}


def cmd_largeness(args, _text=None):
    try:
        if args.word:
            rels = [Word.parse(t, args.rank) for t in args.word]
            data = magnus.largeness_presentation(rels, args.n, _generator(args.stable, args.rank))
        else:
            if None in (args.g, args.r, args.m):
                raise UsageError("give --word relators or all of --g, --r, --m")
            data = magnus.baumslag_pride(args.g, args.r, args.m)
    except (magnus.LargenessError, magnus.ExponentSumError) as exc:
        raise DomainFailure(str(exc)) from None
    return data.to_dict()


def _seed_tuple(h, modulus):
    return matdyn.reduce_tuple(matdyn.sanov_seed(h.base_rank), modulus)


def cmd_period(args, _text=None):
    h = _group(args)
    if args.mod < 2:
        raise UsageError("--mod must be at least 2")
    try:
        rec = matdyn.find_cycle(h, _seed_tuple(h, args.mod), limit=args.limit)
    except matdyn.StateLimitError as exc:
        raise DomainFailure(str(exc)) from None
    return {"modulus": args.mod, **rec.to_dict()}


def cmd_hensel(args, _text=None):
    h = _group(args)
    try:
        rep = matdyn.hensel_check(h, matdyn.sanov_seed(h.base_rank), args.p, args.max_exponent)
    except matdyn.NotPeriodicError as exc:
        raise DomainFailure(str(exc)) from None
    return {**rep.to_dict(), "violations": rep.violations}


def cmd_quasifixed(args, _text=None):
    h = _group(args)
    query = matdyn.QuasiFixedQuery(args.q, args.m, args.s, args.space)
    try:
        found = matdyn.quasi_fixed_search(query, h)
    except matdyn.SearchTooLarge as exc:
        raise DomainFailure(str(exc)) from None
    return {
        "q": args.q,
        "m": args.m,
        "s": args.s,
        "space": args.space,
        "count": len(found),
        "tuples": [matdyn.entries(t) for t in found],
    }


def cmd_certify(args, text):
    h = _group(args)
    w = Word.parse(text, h.base_rank)
    if not w:
        raise UsageError("the empty word has no certificate")
    primes = tuple(int(p) for p in args.primes.split(","))
    res = cert_mod.certify(h, w, primes, args.max_exponent)
    if isinstance(res, cert_mod.CertifyFailure):
        return {"found": False, **res.to_dict()}
    return {"found": True, **res.to_dict()}


def cmd_verify(args, _text=None):
    src = args.stdin if args.file == "-" else open(args.file)
    try:
        data = json.load(src)
    finally:
        if src is not args.stdin:
            src.close()
    try:
        c = cert_mod.Certificate.from_dict(data)
        ok = cert_mod.verify(c)
    except (KeyError, TypeError, ValueError):
        ok = False
    if not ok:
        raise DomainFailure("certificate does not verify", {"verified": False})
    return {"verified": True, "word": str(c.word), "p": c.p, "e": c.e, "ell": c.period}


def cmd_experiment(args, _text=None):
    lengths = tuple(int(x) for x in args.lengths.split(","))
    spec = experiments.ExperimentSpec(
        args.kind, args.rank, lengths, args.trials, args.seed, args.workers, args.threshold
    )
    rep = experiments.run(spec)
    if args.format == "csv":
        return rep.to_csv()
    return rep.to_dict(timing=args.timing, audit=args.audit)


WORD_COMMANDS = {"brown", "goodness", "magnus", "extract", "normalform", "embed", "certify"}

_STR = {"type": "string"}
_INT = {"type": "integer"}
_MATRIX = {"type": "array", "items": {"type": "array", "items": _STR, "minItems": 2, "maxItems": 2}}
_HNN = {
    "type": "object",
    "required": ["base_rank", "phi", "stable", "labels"],
    "properties": {"base_rank": _INT, "phi": {"type": "array", "items": _STR}, "stable": _STR},
}
SCHEMAS = {
    "sample": {"type": "object", "required": ["rank", "model", "seed", "words"],
               "properties": {"words": {"type": "array", "items": _STR}}},
    "brown": {"type": "object", "required": ["word", "status"],
              "properties": {"status": {"enum": [s.value for s in lattice.Status]}}},
    "goodness": {"type": "object", "required": ["word", "good"]},
    "magnus": {"type": "object", "required": ["word", "stable", "letters", "ranges", "rewritten"]},
    "extract": {"type": "object", "required": ["word", "status"],
                "properties": {"status": {"enum": ["AscendingHNN", "NotAscending"]}, "hnn": _HNN}},
    "normalform": {"type": "object", "required": ["word", "k", "g", "l"],
                   "properties": {"k": _INT, "g": _STR, "l": _INT}},
    "smallcancel": {"type": "object", "required": ["words", "max_piece", "lambda_star", "holds"]},
    "embed": {"type": "object", "required": ["word", "relator", "images", "n", "brown"]},
    "largeness": {"type": "object", "required": ["g", "r", "m", "n", "K_generators", "K_relators"]},
    "period": {"type": "object", "required": ["modulus", "tail", "period", "point"],
               "properties": {"tail": _INT, "period": _INT, "point": {"type": "array", "items": _MATRIX}}},
    "hensel": {"type": "object", "required": ["p", "periods", "tails", "holds", "violations"]},
    "quasifixed": {"type": "object", "required": ["q", "m", "s", "space", "count", "tuples"]},
    "certify": {"type": "object", "required": ["found", "word"],
                "properties": {"found": {"type": "boolean"}, "hnn": _HNN, "p": _INT, "e": _INT, "ell": _INT}},
    "verify": {"type": "object", "required": ["verified"]},
    "experiment": {"type": "object", "required": ["spec", "rows"]},
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="onerelator", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, help_text, word=False):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--schema", action="store_true", help="print the output JSON schema and exit")
        if word:
            p.add_argument("--word", help="input word; omit or '-' to read one word per stdin line")
        return p

    def rank(p, default=2):
        p.add_argument("--rank", type=int, default=default, help=f"number of generators (default {default})")

    def group(p):
        p.add_argument("--group", default="HT", help="named group: " + ", ".join(magnus.NAMED_GROUPS))
        p.add_argument("--phi", help="comma separated images of a, b, ... instead of --group")

    p = add("sample", "draw random relators")
    rank(p)
    p.add_argument("--length", type=int, required=True, help="maximal (or exact, with --exact) length")
    p.add_argument("--model", type=int, choices=(1, 2), default=2)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--raw", action="store_true", help="model 1: reduce a uniform letter string")
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)

    p = add("brown", "Brown's criterion (rank 2)", word=True)
    rank(p)
    p = add("goodness", "hull goodness (rank 3) or Brown goodness (rank 2)", word=True)
    rank(p, 3)
    p.add_argument("--make-good", type=int, metavar="VERTEX", help="repair at this hull vertex index")
    for name, text in (("magnus", "Magnus rewriting"), ("extract", "ascending HNN extraction")):
        p = add(name, text, word=True)
        rank(p)
        p.add_argument("--stable", default="a", help="stable generator letter (default a)")
    p = add("normalform", "t^-k g t^l normal form; t/T is the stable letter", word=True)
    group(p)
    p = add("smallcancel", "longest pieces and C'(lambda)")
    rank(p)
    p.add_argument("--word", action="append", required=True, help="relator; repeat for a collection")
    p.add_argument("--threshold", default="1/6")
    p = add("embed", "embed a rank-k one-relator group in a two-generator one", word=True)
    rank(p, 3)
    p.add_argument("--n", type=int)
    p = add("largeness", "index-n subgroup counts or rewritten presentation")
    rank(p)
    p.add_argument("--g", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--m", type=int)
    p.add_argument("--word", action="append", help="relator with zero exponent sum in --stable")
    p.add_argument("--stable", default="a")
    p.add_argument("--n", type=int)
    p = add("period", "tail and period of the seed tuple mod m")
    group(p)
    p.add_argument("--mod", type=int, required=True)
    p.add_argument("--limit", type=int, default=10**7)
    p = add("hensel", "periods mod p^e against the p^(e-1) law")
    group(p)
    p.add_argument("--p", type=int, required=True)
    p.add_argument("--max-exponent", type=int, default=3)
    p = add("quasifixed", "tuples with phi(X) = X^(q^s) over GF(q^m)")
    group(p)
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--m", type=int, default=1)
    p.add_argument("--s", type=int, default=1)
    p.add_argument("--space", choices=("SL2", "M2"), default="SL2")
    p = add("certify", "wreath-product certificate that a base word is nontrivial", word=True)
    group(p)
    p.add_argument("--primes", default=",".join(map(str, cert_mod.DEFAULT_PRIMES)))
    p.add_argument("--max-exponent", type=int, default=cert_mod.DEFAULT_MAX_EXPONENT)
    p = add("verify", "recheck a certificate")
    p.add_argument("--file", default="-", help="certificate JSON file (default stdin)")
    p = add("experiment", "Monte Carlo experiment")
    p.add_argument("--kind", choices=experiments.KINDS, required=True)
    rank(p)
    p.add_argument("--lengths", required=True, help="comma separated lengths")
    p.add_argument("--trials", type=int, default=1000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--threshold", default="1/6")
    p.add_argument("--format", choices=("json", "csv"), default="json")
    p.add_argument("--timing", action="store_true", help="include elapsed time (breaks byte identity)")
    p.add_argument("--audit", action="store_true", help="include sample failing words")
    return parser


def _run_one(args, text):
    try:
        return 0, COMMANDS[args.command](args, text)
    except DomainFailure as exc:
        return 1, {**exc.payload, "error": str(exc)}
    except (WordError, UsageError) as exc:
        return 2, {"error": str(exc)}
    except ValueError as exc:
        return 1, {"error": str(exc)}


def _emit(obj, out):
    if isinstance(obj, str):
        out.write(obj)
    else:
        out.write(json.dumps(obj, sort_keys=False) + "\n")


def main(argv=None, stdin=None, stdout=None) -> int:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    args.stdin = stdin
    if args.schema:
        _emit(SCHEMAS[args.command], stdout)
        return 0
    if args.command in WORD_COMMANDS and args.word in (None, "-"):
        code = 0
        for line in stdin:
            line = line.strip()
            if not line:
                continue
            c, obj = _run_one(args, line)
            code = max(code, c)
            _emit(obj, stdout)
        return code
    code, obj = _run_one(args, getattr(args, "word", None))
    if code:
        sys.stderr.write(obj["error"] + "\n")
    _emit(obj, stdout)
    return code


COMMANDS = {
    "sample": cmd_sample,
    "brown": cmd_brown,
    "goodness": cmd_goodness,
    "magnus": cmd_magnus,
    "extract": cmd_extract,
    "normalform": cmd_normalform,
    "smallcancel": cmd_smallcancel,
    "embed": cmd_embed,
    "largeness": cmd_largeness,
    "period": cmd_period,
    "hensel": cmd_hensel,
    "quasifixed": cmd_quasifixed,
    "certify": cmd_certify,
    "verify": cmd_verify,
    "experiment": cmd_experiment,
}
