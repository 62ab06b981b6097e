"""Python bindings for the lppl_rebound C++ core.

Dates are ISO ``YYYY-MM-DD`` strings; ``datetime.date`` values are accepted
wherever a date or a list of dates is expected.
"""

import datetime as _dt

from . import _core
from ._core import (
    ConfigError,
    DataError,
    NumericalError,
    alarm_ratio,
    count_windows,
    date_from_day_number,
    eval_lppl,
    eval_power_law,
    plant_rebound_course,
    quantile,
    singularity_trajectory,
    skill_summary,
)

__all__ = [
    "ConfigError",
    "DataError",
    "NumericalError",
    "alarm_ratio",
    "count_windows",
    "date_from_day_number",
    "day_number",
    "detect_crashes",
    "detect_peaks",
    "detect_rebounds",
    "error_diagram",
    "eval_lppl",
    "eval_power_law",
    "fit_window",
    "generate_windows",
    "plant_rebound_course",
    "quantile",
    "run_pipeline",
    "singularity_trajectory",
    "skill_summary",
    "synth_lppl",
]


def _iso(d):
    if isinstance(d, (_dt.date, _dt.datetime)):
        return d.strftime("%Y-%m-%d")
    return str(d)


def _isos(ds):
    return [_iso(d) for d in ds]


def day_number(d):
    return _core.day_number(_iso(d))


def generate_windows(t10="1950-01-03", t20="2009-06-03", dt1=50, dt2=50, dt_min=110, dt_max=1500):
    return _core.generate_windows(_iso(t10), _iso(t20), dt1, dt2, dt_min, dt_max)


def fit_window(dates, prices, t1, t2, **search):
    """Fit one window; ``search`` takes model, seed, n_candidates, n_starts, max_evals."""
    return _core.fit_window(_isos(dates), list(prices), _iso(t1), _iso(t2), **search)


def detect_rebounds(dates, prices, radius=200):
    return _core.detect_rebounds(_isos(dates), list(prices), radius)


def detect_peaks(dates, prices, radius=200):
    return _core.detect_peaks(_isos(dates), list(prices), radius)


def detect_crashes(dates, prices, drop=0.15, horizon=21):
    return _core.detect_crashes(_isos(dates), list(prices), drop, horizon)


def error_diagram(dates, ri, rebound_dates, duration=40):
    """List of (threshold, alarm_fraction, miss_fraction)."""
    return _core.error_diagram(_isos(dates), list(ri), _isos(rebound_dates), duration)


def synth_lppl(A, B, C, m, tc, omega, phi, start="2000-01-03", end="2002-12-31", noise_sigma=0.0, seed=1):
    return _core.synth_lppl(A, B, C, m, _iso(tc), omega, phi, _iso(start), _iso(end), noise_sigma, seed)


def run_pipeline(dates, prices, config=None, output_dir="rebound_run"):
    """Run the full pipeline. ``config`` is a dict of key/value overrides or config text."""
    if isinstance(config, dict):
        text = "\n".join(f"{k} = {v}" for k, v in config.items())
    else:
        text = config or ""
    return _core.run_pipeline(_isos(dates), list(prices), text, str(output_dir))
