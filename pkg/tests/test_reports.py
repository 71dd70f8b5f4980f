import math

import pytest

from mobacc.entropy import EntropyProfile
from mobacc.intervals import IntervalFit, KsResult
from mobacc.markov import PredictionResult
from mobacc.reports import (
    read_accuracy_report,
    read_entropy_report,
    read_interval_report,
    write_accuracy_report,
    write_entropy_report,
    write_interval_report,
)


def test_entropy_report_round_trip(tmp_path):
    profiles = [
        EntropyProfile("u2", 2.0, 1.5, 0.75, 4, 1000),
        EntropyProfile("u1", 3.321928, 2.8, 1.234567, 10, 5000),
    ]
    path = tmp_path / "entropy.csv"
    write_entropy_report(path, profiles)
    text = path.read_text().splitlines()
    assert text[0] == "user_id,n,unique_locations,s_rand,s_unc,s_real"
    assert text[1].startswith("u1,5000,10,3.321928,")
    back = read_entropy_report(path)
    assert [p.user_id for p in back] == ["u1", "u2"]
    assert back[1].s_real == 0.75


def test_accuracy_report_round_trip(tmp_path):
    results = [PredictionResult("u1", 2, 998, 499, 0.5), PredictionResult("u0", 2, 998, 998, 1.0)]
    path = tmp_path / "accuracy.csv"
    write_accuracy_report(path, results)
    back = read_accuracy_report(path)
    assert [r.user_id for r in back] == ["u0", "u1"]
    assert back[0].hits == 998
    assert back[1].accuracy == 0.5


def test_interval_report_formats(tmp_path):
    rows = [
        (IntervalFit(0.05, 0, math.nan, math.nan, "moments"), None),
        (IntervalFit(0.10, 12, 0.5, 0.01, "moments"), KsResult(0.12, 0.4, True)),
        (IntervalFit(0.15, 40, 0.4, 0.02, "kde-least-squares"), KsResult(0.3, 0.001, False)),
    ]
    path = tmp_path / "intervals.csv"
    write_interval_report(path, rows)
    lines = path.read_text().splitlines()
    assert lines[0].startswith("#")
    assert lines[2] == "0.05,0,,,,,,"
    assert lines[3] == "0.10,12,0.500000,0.010000,moments,0.120000,0.400000,true"
    parsed = read_interval_report(path)
    assert parsed[0]["user_count"] == 0 and parsed[0]["ks_pass"] is None
    assert parsed[1]["ks_pass"] is True
    assert parsed[2]["ks_pass"] is False
    assert parsed[2]["fit_method"] == "kde-least-squares"


def test_reader_rejects_wrong_header(tmp_path):
    path = tmp_path / "entropy.csv"
    path.write_text("wrong,header\n")
    with pytest.raises(ValueError, match="expected header"):
        read_entropy_report(path)


def test_reader_rejects_ragged_rows(tmp_path):
    path = tmp_path / "accuracy.csv"
    path.write_text("user_id,order,attempts,hits,accuracy\nu1,2,10\n")
    with pytest.raises(ValueError, match="fields"):
        read_accuracy_report(path)
