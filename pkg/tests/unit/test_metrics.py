"""Tests for verification timing and counters."""

from auctionlab import CheckMetrics, NullMetrics, VerificationConfig, run_verification


def test_record_aggregates_by_name():
    """Recorded durations are aggregated per operation type and name."""
    metrics = CheckMetrics()
    metrics.record("check", "probability_mass", 0.5, {"n": 8})
    metrics.record("check", "probability_mass", 1.5)
    metrics.record("check", "range_bounds", 0.25)

    aggregated = metrics.get_aggregated("check")
    assert aggregated["probability_mass"].count == 2
    assert aggregated["probability_mass"].total_time == 2.0
    assert aggregated["probability_mass"].avg_time == 1.0
    assert aggregated["probability_mass"].max_time == 1.5
    assert metrics.operations[0].n == 8


def test_measure_records_on_error():
    """A failing block still records its duration."""
    metrics = CheckMetrics()
    try:
        with metrics.measure("sweep", "gap_scaling"):
            raise RuntimeError("boom")
    except RuntimeError:
        pass
    assert metrics.get_aggregated("sweep")["gap_scaling"].count == 1


def test_counters_by_size():
    metrics = CheckMetrics()
    metrics.count("lp_pivots", 40, n=11)
    metrics.count("lp_pivots", 2, n=11)
    metrics.count("lp_pivots", 7, n=12)
    metrics.count("solves")
    assert metrics.counters["lp_pivots"] == {11: 42, 12: 7}
    assert metrics.counters["solves"][None] == 1


def test_report_sections():
    metrics = CheckMetrics()
    metrics.start_run()
    metrics.record("n_min", "find_n_min", 2.0)
    metrics.record("check", "probability_mass", 0.5, {"n": 8})
    metrics.record("check", "probability_mass", 0.5, {"n": 16})
    metrics.record("check", "range_bounds", 0.5, {"n": 16})
    metrics.count("lp_pivots", 42, n=11)
    metrics.end_run()

    assert metrics.cases_by_n() == {8: 1, 16: 2}
    report = metrics.get_report()
    assert "AUCTIONLAB VERIFICATION METRICS REPORT" in report
    assert "N MIN METRICS" in report
    assert "CHECK METRICS" in report
    assert "SWEEP METRICS" not in report
    assert "CASE CHECKS PER N" in report
    assert "lp_pivots n=11" in report
    assert "(check: 3, n_min: 1)" in metrics.get_summary()


def test_null_metrics_is_inert():
    metrics = NullMetrics()
    metrics.start_run()
    metrics.record("check", "a", 1.0)
    metrics.count("lp_pivots", 3, n=4)
    with metrics.measure("sweep", "b"):
        pass
    metrics.end_run()
    assert metrics.get_total_time() == 0.0
    assert metrics.get_aggregated("check") == {}
    assert metrics.get_report() == "Metrics collection disabled"


def test_verification_records_cases_per_size():
    """run_verification feeds per-case durations into the collector."""
    metrics = CheckMetrics()
    config = VerificationConfig(n_values=[2, 3], trials=1, checks=["probability_mass"])
    run_verification(config, metrics=metrics)
    # Structured inputs (three plus one per bit) and one random pair per size.
    assert metrics.cases_by_n() == {2: 6, 3: 7}
    assert metrics.get_aggregated("check")["probability_mass"].count == 13
    assert metrics.get_aggregated("n_min") == {}
    assert metrics.get_total_time() >= 0.0
