"""Monte Carlo estimates over random relators.

Trial ``i`` at the ``j``-th length uses ``trial_rng(seed, j * trials + i)``,
so counts do not depend on how trials are split between worker processes.
"""

from __future__ import annotations

import csv
import io
import json
import math
import multiprocessing
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from fractions import Fraction

from .freewords import CyclicWord, sample, sample_exact, trial_rng
from .lattice import Inapplicable, Status, brown_k2, hull_analysis
from .magnus import is_proper_power, small_cancellation

KINDS = ("p_good", "hull_goodness", "hull_growth", "small_cancellation")
AUDIT_LIMIT = 20


@dataclass(frozen=True)
class ExperimentSpec:
    kind: str
    rank: int
    lengths: tuple[int, ...]
    trials: int
    seed: int = 0
    workers: int = 1
    threshold: str = "1/6"

    def __post_init__(self):
        object.__setattr__(self, "lengths", tuple(self.lengths))
        if self.kind not in KINDS:
            raise ValueError(f"unknown experiment {self.kind!r}")
        if self.trials < 1:
            raise ValueError("trials must be at least 1")
        if not self.lengths or min(self.lengths) < 1:
            raise ValueError("lengths must be positive")
        if self.workers < 1:
            raise ValueError("workers must be at least 1")
        lam = Fraction(self.threshold)
        if not 0 < lam <= 1:
            raise ValueError("threshold must lie in (0, 1]")

    def echo(self) -> dict:
        d = asdict(self)
        d.pop("workers")
        d["lengths"] = list(self.lengths)
        if self.kind != "small_cancellation":
            d.pop("threshold")
        return d


def wilson(successes: int, n: int, z: float = 1.959963984540054) -> tuple[float, float]:
    if n == 0:
        return 0.0, 1.0
    p = successes / n
    denom = 1 + z * z / n
    centre = (p + z * z / (2 * n)) / denom
    half = z * math.sqrt(p * (1 - p) / n + z * z / (4 * n * n)) / denom
    lo = 0.0 if successes == 0 else max(0.0, centre - half)
    hi = 1.0 if successes == n else min(1.0, centre + half)
    return lo, hi


# -- per-trial verdicts --------------------------------------------------------

def _draw(spec: ExperimentSpec, length: int, index: int) -> CyclicWord:
    rng = trial_rng(spec.seed, index)
    if spec.kind in ("p_good", "small_cancellation"):
        return sample(spec.rank, length, 2, rng)
    return sample_exact(spec.rank, length, rng)


def _verdict(spec: ExperimentSpec, w: CyclicWord):
    if spec.kind == "p_good":
        status = brown_k2(w).status
        if status is Status.INAPPLICABLE:
            return "degenerate"
        return "good" if status is Status.ASCENDING else "bad"
    if spec.kind in ("hull_goodness", "hull_growth"):
        try:
            ha = hull_analysis(w)
        except Inapplicable:
            return "degenerate"
        if spec.kind == "hull_growth":
            return len(ha.vertices)
        return "good" if ha.good else "bad"
    if is_proper_power(w):
        return "proper_power"
    rep = small_cancellation([w], Fraction(spec.threshold))
    return "pass" if rep.holds else "fail"


def _chunk(args):
    spec, j, start, stop = args
    length = spec.lengths[j]
    counts: Counter = Counter()
    total = total_sq = 0
    audit = []
    for i in range(start, stop):
        w = _draw(spec, length, j * spec.trials + i)
        v = _verdict(spec, w)
        if isinstance(v, int):
            counts["measured"] += 1
            total += v
            total_sq += v * v
        else:
            counts[v] += 1
            if v in ("bad", "fail") and len(audit) < AUDIT_LIMIT:
                audit.append((i, str(w)))
    return j, dict(counts), total, total_sq, audit


@dataclass
class ExperimentReport:
    spec: ExperimentSpec
    rows: list[dict]
    elapsed: float = 0.0
    audit: dict = field(default_factory=dict)

    def to_dict(self, timing: bool = False, audit: bool = False) -> dict:
        d = {"spec": self.spec.echo(), "rows": self.rows}
        if audit:
            d["audit"] = {str(k): v for k, v in sorted(self.audit.items())}
        if timing:
            d["elapsed_seconds"] = round(self.elapsed, 3)
        return d

    def to_json(self, **kw) -> str:
        return json.dumps(self.to_dict(**kw), indent=2, sort_keys=False)

    def to_csv(self) -> str:
        buf = io.StringIO()
        keys = list(self.rows[0].keys())
        flat = [k for k in keys if k != "counts"]
        count_keys = sorted({c for r in self.rows for c in r.get("counts", {})})
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(flat + count_keys)
        for r in self.rows:
            writer.writerow([r[k] for k in flat] + [r.get("counts", {}).get(c, 0) for c in count_keys])
        return buf.getvalue()

    def estimate(self, length: int | None = None) -> float:
        row = self.rows[0] if length is None else next(r for r in self.rows if r["length"] == length)
        return row["estimate"] if "estimate" in row else row["mean"]


_SUCCESS = {"p_good": "good", "hull_goodness": "good", "small_cancellation": "pass"}
_FAILURE = {"p_good": ("bad",), "hull_goodness": ("bad",), "small_cancellation": ("fail",)}


def _row(spec: ExperimentSpec, length: int, counts: Counter, total: int, total_sq: int) -> dict:
    row = {"length": length, "trials": spec.trials}
    if spec.kind == "hull_growth":
        n = counts.get("measured", 0)
        mean = total / n if n else 0.0
        var = (total_sq - total * total / n) / (n - 1) if n > 1 else 0.0
        row.update(measured=n, degenerate=counts.get("degenerate", 0), mean=round(mean, 6), variance=round(var, 6))
        return row
    ok = counts.get(_SUCCESS[spec.kind], 0)
    considered = ok + sum(counts.get(k, 0) for k in _FAILURE[spec.kind])
    lo, hi = wilson(ok, considered)
    row["counts"] = {k: counts[k] for k in sorted(counts)}
    row.update(
        considered=considered,
        estimate=round(ok / considered, 6) if considered else 0.0,
        ci_low=round(lo, 6),
        ci_high=round(hi, 6),
    )
    return row


def run(spec: ExperimentSpec) -> ExperimentReport:
    if spec.kind == "p_good" and spec.rank != 2:
        raise ValueError("p_good needs rank 2")
    if spec.kind in ("hull_goodness", "hull_growth") and spec.rank != 3:
        raise ValueError("hull experiments need rank 3; a rank-2 hull is just two vertices")
    t0 = time.perf_counter()
    per = max(1, math.ceil(spec.trials / (4 * spec.workers)))
    jobs = [
        (spec, j, s, min(s + per, spec.trials))
        for j in range(len(spec.lengths))
        for s in range(0, spec.trials, per)
    ]
    if spec.workers > 1:
        ctx = multiprocessing.get_context("spawn")
        with ctx.Pool(spec.workers) as pool:
            results = pool.map(_chunk, jobs)
    else:
        results = [_chunk(job) for job in jobs]
    counts = [Counter() for _ in spec.lengths]
    sums = [[0, 0] for _ in spec.lengths]
    audit: dict = {}
    for j, c, total, total_sq, aud in results:
        counts[j].update(c)
        sums[j][0] += total
        sums[j][1] += total_sq
        for i, w in aud:
            audit.setdefault(spec.lengths[j], []).append([i, w])
    for k in audit:
        audit[k] = sorted(audit[k])[:AUDIT_LIMIT]
    rows = [_row(spec, n, counts[j], *sums[j]) for j, n in enumerate(spec.lengths)]
    return ExperimentReport(spec, rows, time.perf_counter() - t0, audit)


def run_p_good(n: int = 500, trials: int = 10_000, seed: int = 0, workers: int = 1) -> ExperimentReport:
    """Fraction of cyclically reduced rank-2 relators of length <= n passing Brown's criterion."""
    return run(ExperimentSpec("p_good", 2, (n,), trials, seed, workers))


def run_hull_goodness(lengths=(50, 200, 800), trials: int = 2000, seed: int = 0, workers: int = 1) -> ExperimentReport:
    return run(ExperimentSpec("hull_goodness", 3, tuple(lengths), trials, seed, workers))


def run_hull_growth(lengths=(50, 200, 800), trials: int = 500, seed: int = 0, workers: int = 1, rank: int = 3) -> ExperimentReport:
    return run(ExperimentSpec("hull_growth", rank, tuple(lengths), trials, seed, workers))


def run_small_cancellation(
    n: int = 500, trials: int = 2000, threshold="1/6", seed: int = 0, workers: int = 1, rank: int = 2
) -> ExperimentReport:
    return run(ExperimentSpec("small_cancellation", rank, (n,), trials, seed, workers, str(Fraction(threshold))))
