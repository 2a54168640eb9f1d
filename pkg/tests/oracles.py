"""Slow, independent reference implementations used to check the library."""

from itertools import product


def enumerate_words(rank, length, cyclic=False):
    """All freely (or cyclically) reduced letter tuples of one length, by brute force."""
    alphabet = [g for g in range(1, rank + 1)] + [-g for g in range(1, rank + 1)]
    for tup in product(alphabet, repeat=length):
        if any(x == -y for x, y in zip(tup, tup[1:])):
            continue
        if cyclic and length >= 2 and tup[0] == -tup[-1]:
            continue
        yield tup


def reduce_naive(letters):
    """Cancel adjacent inverse pairs until none remain (quadratic, on purpose)."""
    letters = list(letters)
    changed = True
    while changed:
        changed = False
        for i in range(len(letters) - 1):
            if letters[i] == -letters[i + 1]:
                del letters[i:i + 2]
                changed = True
                break
    return tuple(letters)


def subgroup_ball(generators, radius, slack=4):
    """Elements of <generators> of length <= radius.

    Breadth-first closure under right multiplication by the generators and
    their inverses, discarding intermediate products longer than
    ``radius + slack``.
    """
    steps = []
    for g in generators:
        if g.letters:
            steps.append(g.letters)
            steps.append(tuple(-x for x in reversed(g.letters)))
    cap = radius + slack
    seen = {()}
    frontier = [()]
    while frontier:
        nxt = []
        for w in frontier:
            for s in steps:
                v = reduce_naive(w + s)
                if len(v) <= cap and v not in seen:
                    seen.add(v)
                    nxt.append(v)
        frontier = nxt
    return {w for w in seen if len(w) <= radius}
