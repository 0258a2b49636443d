import json

import numpy as np
import pytest

from sparcsim import harness
from sparcsim.codec import bits_to_hex, decode_support
from sparcsim.config import sim_config_from_dict
from sparcsim.dictionary import build_mub_prime
from sparcsim.errors import ConfigError
from sparcsim.log import read_logs


def _tiny_config(**overrides):
    raw = {
        "schema_version": 1,
        "config_id": "tiny",
        "dictionary": {"source": "mub", "p": 7},
        "sections": 2,
        "antennas": 2,
        "decoders": ["mlmp", {"name": "mbomp", "paths": 2}],
        "ebn0_db": [-10.0, 20.0],
        "max_trials": 40,
        "min_errors": 5,
        "batch_size": 10,
    }
    raw.update(overrides)
    return sim_config_from_dict(raw)


def test_make_record_flags_low_confidence():
    record = harness.make_record("c", "mlmp", 2.5, 100, 3, 1.25, 0, sec_errors=4, n_sections=2)
    assert record.bler == pytest.approx(0.03)
    assert record.low_confidence
    assert record.ser == pytest.approx(0.02)
    assert record.csv_row() == ["c", "mlmp", "2.5", "100", "3", "0.03", "1.25", "0", "true"]
    assert not harness.make_record("c", "mlmp", 0, 100, 10, 0, 0).low_confidence


def test_record_dict_carries_wilson_interval():
    data = harness.make_record("c", "mlmp", 1.0, 100, 50, 0.0, 0).to_dict()
    assert data["wilson_low"] < 0.5 < data["wilson_high"]
    assert data["decoder"] == "mlmp"


def test_wilson_interval_edges():
    lo, hi = harness.wilson_interval(0, 100)
    assert lo == pytest.approx(0.0, abs=1e-12)
    assert 0.0 < hi < 0.05
    assert harness.wilson_interval(0, 0) == (0.0, 1.0)


def test_ebn0_at_bler_interpolates_in_log_domain():
    records = [
        harness.make_record("c", "mlmp", 0.0, 100, 10, 0, 0),
        harness.make_record("c", "mlmp", 2.0, 1000, 1, 0, 0),
    ]
    assert harness.ebn0_at_bler(records, 1e-2) == pytest.approx(1.0)
    assert harness.ebn0_at_bler(records, 1e-5) is None


def test_theorem1_bound():
    assert harness.theorem1_bound(13) == 2
    assert harness.theorem1_bound(31) == 3
    assert harness.theorem1_bound(61) == 4


def test_draw_trial_is_reproducible():
    d = build_mub_prime(7, 2)
    a = harness.draw_trial(d, 3, 7, 1, 0.1, 2, 0.5)
    b = harness.draw_trial(d, 3, 7, 1, 0.1, 2, 0.5)
    assert a[0] == b[0]
    assert np.array_equal(a[1].h, b[1].h)
    assert np.array_equal(a[2].Y, b[2].Y)


def test_bler_sweep_is_decoder_major_and_logged():
    records = harness.run_bler_sweep(_tiny_config())

    assert [r.decoder for r in records] == ["mlmp", "mlmp", "mbomp-p2", "mbomp-p2"]
    assert [r.ebn0_db for r in records] == [-10.0, 20.0, -10.0, 20.0]
    for r in records:
        assert r.trials <= 40
        assert r.trials % 10 == 0
        assert r.config_id == "tiny"
    assert len(read_logs(event="sweep_point")) == 4


def test_bler_sweep_stops_after_the_batch_that_reaches_min_errors():
    records = harness.run_bler_sweep(_tiny_config(ebn0_db=[-10.0], min_errors=1))
    assert [r.trials for r in records] == [10, 10]
    assert all(r.block_errors >= 1 for r in records)


def test_bler_sweep_does_not_depend_on_thread_count():
    cfg = _tiny_config()
    serial = harness.run_bler_sweep(cfg, threads=1)
    parallel = harness.run_bler_sweep(cfg, threads=4)
    key = lambda r: (r.decoder, r.ebn0_db, r.trials, r.block_errors, r.section_errors)  # noqa: E731
    assert [key(r) for r in serial] == [key(r) for r in parallel]


def test_bler_sweep_reports_progress_per_batch():
    calls = []
    harness.run_bler_sweep(_tiny_config(ebn0_db=[-10.0, 20.0]), progress=lambda *args: calls.append(args))
    assert calls[0] == (0, 2, -10.0, 10)
    assert [c[0] for c in calls] == sorted(c[0] for c in calls)
    assert all(c[3] % 10 == 0 and c[3] <= 40 for c in calls)
    assert calls[-1][:3] == (1, 2, 20.0)


def test_bler_sweep_logs_errored_trials_as_hex():
    cfg = _tiny_config(ebn0_db=[-10.0], decoders=["mlmp"])
    record = harness.run_bler_sweep(cfg)[0]
    entry = read_logs(event="sweep_point")[0]
    failed = entry["failed_trials"]

    assert record.block_errors > 0
    assert 1 <= len(failed) <= min(harness.LOGGED_FAILURES, record.block_errors)
    d = cfg.build_dictionary()
    width = (d.plan.total_bits + 3) // 4
    trials = [f["trial"] for f in failed]
    assert trials == sorted(trials)
    for f in failed:
        assert len(f["sent"]) == len(f["decoded"]) == width
        assert f["sent"] != f["decoded"]
        sent = harness.draw_trial(d, cfg.seed, f["trial"], 0, 1.0, cfg.antennas, cfg.sigma_h_sq)[0]
        assert f["sent"] == bits_to_hex(decode_support(sent, d))


def test_bler_sweep_rejects_more_paths_than_used_columns():
    cfg = _tiny_config(decoders=[{"name": "mlmp", "paths": 1000}])
    with pytest.raises(ConfigError, match="paths"):
        harness.run_bler_sweep(cfg, dictionary=build_mub_prime(7, 2))


def _trace(pairs):
    return [harness.SeTracePoint(t, pred, emp) for t, (pred, emp) in enumerate(pairs)]


def test_judge_se_trace_flags_the_worst_iteration():
    judged = harness.judge_se_trace(_trace([(1.0, 1.02), (0.5, 0.75), (0.2, 0.21)]))
    assert judged["iterations"] == 3
    assert judged["gaps"] == pytest.approx([0.02, 0.5, 0.05])
    assert judged["worst_gap"] == pytest.approx(0.5)
    assert judged["worst_iteration"] == 1
    assert not judged["tracks"]
    assert judged["settles"]


def test_judge_se_trace_passes_inside_the_band_and_checks_iteration_count():
    points = _trace([(1.0, 0.95), (0.4, 0.43), (0.1, 0.1)])
    assert harness.judge_se_trace(points)["tracks"]
    assert harness.judge_se_trace(points, max_iterations=3)["settles"]
    assert not harness.judge_se_trace(points, max_iterations=2)["settles"]
    assert not harness.judge_se_trace(points, tolerance=0.05)["tracks"]


def test_se_trace_compares_prediction_with_simulation():
    cfg = sim_config_from_dict(
        {
            "schema_version": 1,
            "config_id": "trace",
            "dictionary": {"source": "mub", "p": 13},
            "sections": 1,
            "antennas": 2,
            "decoders": [{"name": "samp", "n_mc": 200, "t_max": 5}],
            "ebn0_db": [10.0],
        }
    )
    points = harness.run_se_trace(cfg, trials=20)

    assert 1 <= len(points) <= 5
    assert [p.t for p in points] == list(range(len(points)))
    assert all(p.tau_sq_predicted > 0 and np.isfinite(p.tau_sq_empirical) for p in points)
    assert points[0].tau_sq_empirical == pytest.approx(points[0].tau_sq_predicted, rel=0.6)
    assert read_logs(event="se_trace")[0]["iterations"] == len(points)

    with pytest.raises(ValueError, match="trials"):
        harness.run_se_trace(cfg, trials=0)


def test_theorem1_check_passes_inside_the_bound():
    rows = harness.run_theorem1_check([13], trials=25)
    assert [(r.K, r.bound) for r in rows] == [(1, 2), (2, 2)]
    assert all(r.passed and r.within_bound for r in rows)
    assert len(read_logs(event="theorem1")) == 2


def test_theorem1_check_reports_rows_above_the_bound():
    rows = harness.run_theorem1_check([13], K_list=[3], trials=5)
    assert len(rows) == 1
    assert not rows[0].within_bound


def test_csv_writers(tmp_path):
    records = [harness.make_record("c", "mlmp", 1.0, 10, 2, 0.5, 0)]
    text = harness.write_bler_csv(records)
    assert text.splitlines()[0] == ",".join(harness.CSV_HEADER)
    assert text.splitlines()[1] == "c,mlmp,1,10,2,0.2,0.5,0,true"

    trace = [harness.SeTracePoint(0, 0.5, 0.25)]
    path = harness.write_se_trace_csv(trace, tmp_path / "se.csv")
    assert path.read_text() == "t,tau_sq_predicted,tau_sq_empirical\n0,0.5,0.25\n"

    bound = harness.write_bound_csv([(2.0, 1e-3)])
    assert bound.splitlines() == ["ebn0_db,pe_lower_bound", "2,0.001"]

    out = harness.write_records_json(records, tmp_path / "r.json")
    assert json.loads(out.read_text())[0]["block_errors"] == 2


def test_se_trace_replays_bit_identically():
    cfg = sim_config_from_dict(
        {
            "schema_version": 1,
            "dictionary": {"source": "mub", "p": 13},
            "sections": 1,
            "antennas": 2,
            "decoders": [{"name": "samp", "n_mc": 100, "t_max": 4}],
            "ebn0_db": [10.0],
        }
    )
    first = harness.run_se_trace(cfg, trials=10)
    second = harness.run_se_trace(cfg, trials=10, threads=3)
    assert harness.write_se_trace_csv(first) == harness.write_se_trace_csv(second)
