"""End-to-end checks, one test per acceptance criterion.

Each test records a PASS/FAIL line (shown in the terminal summary) before
asserting, so a failing criterion is reported with the observed values.
"""

import itertools
import json
import random
import time

from conftest import HULL_BAD, HULL_REPAIRED, MAGNUS_RELATOR, cyc

from onerelator.certify import Certificate, certify, verify
from onerelator.experiments import run_p_good
from onerelator.freewords import (
    CyclicWord,
    Word,
    count_words,
    exponent_sum,
    fold,
    membership,
    sample,
    trial_rng,
)
from onerelator.lattice import Status, brown_k2, hull_analysis, is_good, make_good
from onerelator.magnus import (
    H_T,
    EmbeddingError,
    baumslag_pride,
    embed,
    hnn_extract,
    index_span,
    largeness_presentation,
    magnus_rewrite,
    max_piece_bruteforce,
    small_cancellation,
)
from onerelator.matdyn import (
    Mat2,
    QuasiFixedQuery,
    ZMod,
    apply_endo,
    find_cycle,
    quasi_fixed_search,
    reduce_tuple,
    sanov_seed,
)

from oracles import enumerate_words, subgroup_ball


def test_criterion_01_magnus_pipeline(criterion):
    t0 = time.perf_counter()
    mr = magnus_rewrite(cyc(MAGNUS_RELATOR, 2), 1)
    h = hnn_extract(mr)
    elapsed = time.perf_counter() - t0
    got = (str(mr), h.base_rank, [str(w) for w in h.phi], list(h.labels), h.stable)
    want = ("b_1 b_0^-1 b_1 b_0^-1 b_-1^-1", 2, ["bAbA", "a"], ["b_0", "b_1"], "A")
    criterion(1, got == want and elapsed < 1, f"rewrite/extract {got}, {elapsed:.3f}s")


def test_criterion_02_periods(criterion):
    t0 = time.perf_counter()
    seed = sanov_seed(2)
    got = {m: (r.tail, r.period) for m in (5, 25, 125) for r in [find_cycle(H_T, reduce_tuple(seed, m))]}
    elapsed = time.perf_counter() - t0
    want = {5: (0, 6), 25: (0, 30), 125: (0, 150)}
    criterion(2, got == want and elapsed < 5, f"(tail, period) by modulus {got}, expected {want}, {elapsed:.3f}s")


def test_criterion_03_first_iteration(criterion):
    A, B = reduce_tuple(sanov_seed(2), 5)
    x, y = apply_endo(H_T, (A, B))
    want = (((4, 0), (4, 4)), ((4, 4), (0, 4)))
    criterion(3, (x.rows, y.rows) == want, f"phi(A, B) mod 5 = {x.rows}, {y.rows}")


def test_criterion_04_certificates(criterion):
    t0 = time.perf_counter()
    details, ok = [], True
    certs = {}
    for text in ("a", "b", "abAB", "abA"):
        c = certify(H_T, Word.parse(text, 2), primes=(5,))
        good = isinstance(c, Certificate) and c.p == 5 and verify(c)
        if good:
            # survive a JSON round trip as well
            good = verify(Certificate.from_dict(json.loads(json.dumps(c.to_dict()))))
            certs[text] = c
            details.append(f"{text}: p=5 e={c.e} ell={c.period}")
        else:
            details.append(f"{text}: failed")
        ok &= good
    tamper_rejected = True
    for text, c in certs.items():
        d = c.to_dict()
        entry = d["images"][1]["vector"][2]
        entry[0][1] = str((int(entry[0][1]) + 1) % (5 ** c.e))
        tamper_rejected &= not verify(Certificate.from_dict(d))
        d = c.to_dict()
        d["gamma_w"]["vector"][0] = [["1", "0"], ["0", "1"]]
        tamper_rejected &= not verify(Certificate.from_dict(d))
    elapsed = time.perf_counter() - t0
    criterion(
        4,
        ok and tamper_rejected and elapsed < 10,
        f"{'; '.join(details)}; tampered rejected={tamper_rejected}; {elapsed:.2f}s",
    )


def test_criterion_05_p_good(criterion):
    t0 = time.perf_counter()
    first = run_p_good(n=500, trials=10_000, seed=20240601)
    second = run_p_good(n=500, trials=10_000, seed=20240601, workers=2)
    elapsed = time.perf_counter() - t0
    est = first.estimate()
    same = first.to_json() == second.to_json()
    row = first.rows[0]
    criterion(
        5,
        0.92 <= est <= 0.99 and same and elapsed < 180,
        f"p_good={est:.4f} CI=[{row['ci_low']:.4f}, {row['ci_high']:.4f}] counts={row['counts']} "
        f"identical={same} {elapsed:.1f}s",
    )


def test_criterion_06_hull_example(criterion):
    bad = cyc(HULL_BAD, 3)
    ha = hull_analysis(bad)
    repaired = cyc(HULL_REPAIRED, 3)
    outputs = [make_good(bad, v) for v in range(len(ha.vertices))]
    ok = (
        min(ha.multiplicity) >= 2
        and not is_good(bad)
        and is_good(repaired)
        and all(is_good(w) and len(w) == 20 for w in outputs)
    )
    criterion(
        6,
        ok,
        f"multiplicities={ha.multiplicity}; inserted variant good={is_good(repaired)}; "
        f"make_good -> {[str(w) for w in outputs]}",
    )


def test_criterion_07_brown_vs_magnus(criterion):
    t0 = time.perf_counter()
    total = agree = 0
    degenerate = []
    for n in range(1, 11):
        for letters in enumerate_words(2, n, cyclic=True):
            r = CyclicWord(2, letters)
            if exponent_sum(r, 1) != 0:
                continue
            total += 1
            brown = brown_k2(r).status
            magnus_ok = hnn_extract(magnus_rewrite(r, 1)) is not None
            if brown is Status.INAPPLICABLE:
                degenerate.append((str(r), magnus_ok))
                continue
            agree += (brown is Status.ASCENDING) == magnus_ok
    elapsed = time.perf_counter() - t0
    compared = total - len(degenerate)
    extractable = sum(1 for _, m in degenerate if m)
    criterion(
        7,
        agree == compared and elapsed < 120,
        f"{agree}/{compared} agree with M != 0; {len(degenerate)} words with M = 0 are outside "
        f"the criterion ({extractable} of them still extract), {elapsed:.1f}s",
    )


def test_criterion_08_oracles(criterion):
    rng = random.Random(8)
    sc_ok = 0
    collections = 1000
    for _ in range(collections):
        budget = rng.randint(1, 60)
        words = []
        while budget > 0:
            n = rng.randint(1, min(budget, 20))
            words.append(sample(rng.choice((2, 3)), n, 2, rng))
            budget -= n
        total = sum(len(w) for w in words)
        assert total <= 60
        sc_ok += list(small_cancellation(words).max_piece) == max_piece_bruteforce(words)
    counts_ok = all(
        count_words(k, n, cyclic) == sum(1 for _ in enumerate_words(k, n, cyclic))
        for k in (1, 2, 3)
        for n in range(9)
        for cyclic in (False, True)
    )
    corpus = [list(gens) for n in (1, 2) for gens in itertools.combinations(
        [Word(2, w) for k in range(1, 4) for w in enumerate_words(2, k)], n)]
    random.Random(81).shuffle(corpus)
    corpus = corpus[:60]
    fold_ok = 0
    queries = [Word(2, w) for k in range(7) for w in enumerate_words(2, k)]
    for gens in corpus:
        g = fold(gens, 2)
        ball = subgroup_ball(gens, 6)
        fold_ok += all(membership(g, q) == (q.letters in ball) for q in queries)
    criterion(
        8,
        sc_ok == collections and counts_ok and fold_ok == len(corpus),
        f"pieces {sc_ok}/{collections}; counts k<=3 l<=8 {counts_ok}; "
        f"fold/membership {fold_ok}/{len(corpus)} subgroups x {len(queries)} words",
    )


def test_criterion_09_quasi_fixed(criterion):
    t0 = time.perf_counter()
    stats = []
    ok = True
    # over a prime field Frobenius is trivial, so GF(4) is added for nontrivial points
    for q, m in ((2, 1), (3, 1), (2, 2)):
        for s in (1, 2):
            found = quasi_fixed_search(QuasiFixedQuery(q, m, s), H_T)
            periodic = all(find_cycle(H_T, tup).tail == 0 for tup in found)
            ok &= periodic and bool(found)
            stats.append(f"GF({q ** m}) s={s}: {len(found)} found, periodic={periodic}")
    elapsed = time.perf_counter() - t0
    criterion(9, ok and elapsed < 60, f"{'; '.join(stats)}; {elapsed:.2f}s")


def test_criterion_10_kernel_exponent(criterion):
    rng = random.Random(10)
    R = ZMod(25)
    orders_ok = 0
    for _ in range(1000):
        a, b, c = (rng.randrange(5) for _ in range(3))
        x = Mat2.of(((1 + 5 * a, 5 * b), (5 * c, 1 - 5 * a)), R)
        assert x.det() == 1 and x.reduce_mod(5).is_identity()
        p = Mat2.identity(R)
        for _ in range(5):
            p = p * x
        orders_ok += p.is_identity()
    criterion(10, orders_ok == 1000, f"{orders_ok}/1000 kernel elements satisfy x^5 = 1")


def test_criterion_11_embedding(criterion):
    passed, degenerate, failures = 0, [], []
    i = tried = 0
    while passed + len(degenerate) + len(failures) < 20:
        r = sample(3, 12, 2, trial_rng(11, i))
        i += 1
        try:
            e = embed(r)
        except EmbeddingError:
            continue
        tried += 1
        ranks_ok = fold(list(e.images), 2).subgroup_rank == 3
        status = brown_k2(e.relator).status
        if status is Status.INAPPLICABLE:
            # M = 0: Brown's test has no direction; use the Magnus extraction along a
            extracted = hnn_extract(magnus_rewrite(e.relator, 1)) is not None
            (degenerate if extracted and ranks_ok else failures).append(str(r))
        elif status is Status.ASCENDING and ranks_ok:
            passed += 1
        else:
            failures.append(str(r))
    criterion(
        11,
        not failures and passed >= 10,
        f"{passed} images AscendingHNN with 3 free images; {len(degenerate)} with M = 0 "
        f"extract along a {degenerate}; failures {failures}; {i} relators drawn",
    )


def test_criterion_12_largeness(criterion):
    d = baumslag_pride(3, 1, 3)
    params_ok = (d.n, d.k_generators, d.k_relators) == (7, 8, 7)
    rng = random.Random(12)
    ok = done = 0
    while done < 100:
        g = rng.choice((2, 3))
        rels = []
        while len(rels) < rng.randint(1, 2):
            w = sample(g, 10, 1, rng)
            if exponent_sum(w, 1) == 0:
                rels.append(w)
        data = largeness_presentation(rels, n=index_span(rels) + rng.randint(0, 3))
        done += 1
        good = True
        for w, (k, c) in zip(data.relators, data.sources):
            tc = Word(g, (1,) * c)
            good &= data.substitute_back(w) == tc * data.shifted[k] * tc.inverse()
        ok += good
    criterion(
        12,
        params_ok and ok == 100,
        f"baumslag_pride(3,1,3) -> n={d.n}, K {d.k_generators} generators / {d.k_relators} relators; "
        f"round trip {ok}/100",
    )
