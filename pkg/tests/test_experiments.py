import csv
import io
import json

import pytest

from onerelator.experiments import (
    ExperimentSpec,
    _draw,
    run,
    run_hull_goodness,
    run_hull_growth,
    run_p_good,
    run_small_cancellation,
    wilson,
)
from onerelator.freewords import CyclicWord
from onerelator.lattice import Status, brown_k2, hull_analysis
from onerelator.magnus import small_cancellation


def test_wilson_interval():
    lo, hi = wilson(50, 100)
    assert lo < 0.5 < hi and abs((lo + hi) / 2 - 0.5) < 1e-12
    assert wilson(0, 10)[0] == 0.0 and wilson(10, 10)[1] == 1.0
    assert wilson(0, 0) == (0.0, 1.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        ExperimentSpec("p_good", 2, (10,), 0)
    with pytest.raises(ValueError):
        ExperimentSpec("nope", 2, (10,), 5)
    with pytest.raises(ValueError):
        ExperimentSpec("small_cancellation", 2, (10,), 5, threshold="3/2")
    with pytest.raises(ValueError):
        run(ExperimentSpec("hull_growth", 2, (10,), 5))
    with pytest.raises(ValueError):
        run(ExperimentSpec("p_good", 3, (10,), 5))


def test_single_trial_report():
    rep = run_p_good(n=40, trials=1, seed=3)
    row = rep.rows[0]
    assert sum(row["counts"].values()) == 1
    assert row["considered"] in (0, 1) and 0.0 <= row["ci_low"] <= row["ci_high"] <= 1.0
    assert rep.to_dict()["spec"] == {"kind": "p_good", "rank": 2, "lengths": [40], "trials": 1, "seed": 3}


def test_counts_sum_to_trials():
    rep = run_hull_goodness(lengths=(16, 30), trials=300, seed=2)
    for row in rep.rows:
        assert sum(row["counts"].values()) == 300
        assert row["considered"] == row["counts"].get("good", 0) + row["counts"].get("bad", 0)


def test_worker_count_does_not_change_output():
    a = run_p_good(n=60, trials=200, seed=9)
    b = run_p_good(n=60, trials=200, seed=9, workers=3)
    assert a.to_json() == b.to_json()
    assert a.to_json(audit=True) == b.to_json(audit=True)
    assert run_p_good(n=60, trials=200, seed=10).to_json() != a.to_json()


def test_p_good_both_classes_at_length_100():
    row = run_p_good(n=100, trials=1000, seed=1).rows[0]
    assert row["counts"]["good"] > 0 and row["counts"]["bad"] > 0


def test_audit_samples_are_recomputable():
    rep = run_p_good(n=30, trials=300, seed=4)
    listed = rep.to_dict(audit=True)["audit"]["30"]
    assert listed
    for _, text in listed:
        assert brown_k2(CyclicWord.parse(text, 2)).status is Status.NOT_ASCENDING


def test_hull_goodness_trend():
    rep = run_hull_goodness(lengths=(50, 200, 800), trials=500, seed=5)
    est = [r["estimate"] for r in rep.rows]
    for r, s in zip(rep.rows, rep.rows[1:]):
        # nondecreasing up to interval overlap
        assert s["ci_high"] >= r["ci_low"]
    assert est[-1] > 0.99


def test_hull_goodness_length_16_has_both_classes():
    row = run_hull_goodness(lengths=(16,), trials=20_000, seed=16).rows[0]
    assert 0 < row["estimate"] < 1


def test_hull_growth_increases():
    rep = run_hull_growth(lengths=(50, 200, 800), trials=200, seed=6)
    means = [r["mean"] for r in rep.rows]
    assert means == sorted(means) and len(set(means)) == 3
    for r in rep.rows:
        assert r["variance"] >= 0 and r["measured"] + r["degenerate"] == 200


def test_hull_growth_single_word_passthrough():
    spec = ExperimentSpec("hull_growth", 3, (40,), 1, seed=8)
    w = _draw(spec, 40, 0)
    assert run(spec).rows[0]["mean"] == len(hull_analysis(w).vertices)


def test_small_cancellation_frequency():
    row = run_small_cancellation(n=500, trials=2000, seed=7).rows[0]
    assert row["estimate"] > 0.9


def test_small_cancellation_threshold_one():
    row = run_small_cancellation(n=8, trials=2000, threshold=1, seed=7).rows[0]
    assert row["estimate"] == 1.0
    assert row["counts"].get("proper_power", 0) > 0


def test_small_cancellation_single_trial_matches_direct():
    spec = ExperimentSpec("small_cancellation", 2, (12,), 1, seed=11)
    w = _draw(spec, 12, 0)
    row = run(spec).rows[0]
    direct = small_cancellation([w], spec.threshold).holds
    assert row["counts"] == {("pass" if direct else "fail"): 1}


def test_csv_output():
    rep = run_hull_goodness(lengths=(16, 20), trials=50, seed=1)
    rows = list(csv.DictReader(io.StringIO(rep.to_csv())))
    assert [int(r["length"]) for r in rows] == [16, 20]
    assert {"estimate", "ci_low", "ci_high", "good"} <= set(rows[0])
    assert json.loads(rep.to_json())["rows"][0]["length"] == 16


def test_timing_only_on_request():
    rep = run_p_good(n=20, trials=10, seed=1)
    assert "elapsed_seconds" not in rep.to_dict()
    assert "elapsed_seconds" in rep.to_dict(timing=True)
