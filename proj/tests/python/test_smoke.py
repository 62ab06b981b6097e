import datetime as dt
import json
import math

import pytest

import lppl_rebound as lr


def test_window_grid():
    assert lr.count_windows() == 11313
    w = lr.generate_windows("2000-01-01", "2000-07-19")
    assert w == [("2000-01-01", "2000-05-30"), ("2000-01-01", "2000-07-19"), ("2000-02-20", "2000-07-19")]
    assert lr.generate_windows(dt.date(2000, 1, 1), dt.date(2000, 4, 10)) == []


def test_model_evaluation():
    assert lr.eval_power_law(1.0, -1.0, 0.5, 100.0, 96.0) == pytest.approx(-1.0)
    assert lr.eval_lppl(1.0, 1.0, 0.0, 0.5, 100.0, 6.0, 0.0, 91.0) == pytest.approx(4.0)
    with pytest.raises(lr.DataError):
        lr.eval_power_law(1.0, 1.0, 0.5, 100.0, 100.0)


def test_dates():
    assert lr.day_number("1970-01-11") == 10.0
    assert lr.day_number(dt.date(1970, 1, 11)) == 10.0
    assert lr.date_from_day_number(10.5) == "1970-01-11"


def test_fit_recovers_synthetic_bubble():
    tc = "2003-01-20"
    tcn = lr.day_number(tc)
    t1 = lr.day_number("2001-06-01")
    B = 0.3 / (tcn - t1) ** 0.5
    dates, prices = lr.synth_lppl(4.0, B, 0.1 * B, 0.5, tc, 8.0, 1.0, start="2001-06-01", end="2002-12-31")
    fit = lr.fit_window(dates, prices, "2001-06-01", "2002-12-31")
    assert abs(fit["tc"] - tcn) <= 2.0
    assert abs(fit["m"] - 0.5) <= 0.02
    assert fit["bubble"] == "negative_bubble"
    assert fit["rmse"] < 1e-6
    again = lr.fit_window(dates, prices, "2001-06-01", "2002-12-31")
    assert again == fit


def test_rebounds_and_peaks():
    dates, prices, troughs = lr.plant_rebound_course(n_bubbles=3, spacing=500, noise_sigma=0.0)
    assert lr.detect_rebounds(dates, prices) == troughs
    inv = [1.0 / p for p in prices]
    assert lr.detect_peaks(dates, inv) == troughs
    assert lr.detect_rebounds(dates[:300], prices[:300]) == []


def test_crash_detection():
    start = dt.date(2000, 1, 3)
    dates = [start + dt.timedelta(days=i) for i in range(60)]
    prices = [100.0] * 31 + [96.0, 92.0, 88.0, 84.0, 80.0] + [80.0] * 24
    assert lr.detect_crashes(dates, prices) == ["2000-02-02"]


def test_alarm_ratio_and_diagram():
    assert lr.alarm_ratio(0, 0) == 0.0
    assert lr.alarm_ratio(3, 1) == 0.75
    start = dt.date(1990, 1, 1)
    dates = [start + dt.timedelta(days=i) for i in range(200)]
    ri = [0.0] * 200
    ri[50] = 1.0
    curve = lr.error_diagram(dates, ri, [dates[60], dates[150]])
    assert curve[0][1:] == (1.0, 0.0)
    assert curve[-1][1:] == (0.0, 1.0)
    assert (0.0, 41 / 200, 0.5) in curve
    assert lr.skill_summary([(0, 0.0, 1.0), (0, 0.0, 0.0), (0, 1.0, 0.0)]) == pytest.approx(0.5)


def test_singularity():
    x = lr.singularity_trajectory(2.0, 0.01, 2.0, [0.0, 25.0])
    assert x[0] == 2.0
    assert x[1] == pytest.approx(4.0)


def test_errors_map_to_python():
    with pytest.raises(lr.ConfigError):
        lr.plant_rebound_course(n_bubbles=2, spacing=100)
    with pytest.raises(ValueError):
        lr.detect_rebounds(["2000-01-02", "2000-01-01"], [1.0, 2.0])
    assert math.isclose(lr.quantile([10, 20, 30, 40, 50], 0.2), 18.0)


def test_pipeline(tmp_path):
    dates, prices, _ = lr.plant_rebound_course(n_bubbles=4)
    config = {
        "t10": dates[0],
        "t20": dates[-1],
        "dt1": 40,
        "dt2": 40,
        "dt_max": 700,
        "n_candidates": 48,
        "n_starts": 1,
        "max_evals": 250,
        "exclude_boundary_fits": "false",
        "split": dates[len(dates) * 3 // 4],
    }
    result = lr.run_pipeline(dates, prices, config, tmp_path / "run")
    assert result["n_windows"] > 0
    assert len(result["diagrams"]) == 3
    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
    assert manifest["config_hash"] == result["config_hash"]
