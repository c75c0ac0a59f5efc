import pytest

from opmean.utils.exceptions import ExceptionInvalidData
from opmean.utils.query_parser import parse_grid, parse_ids, parse_params


def test_parse_params_with_aliases_and_commas():
    assert parse_params(["lam=0.3,s=0.5", "a = 0.25"]) == {"lambda": 0.3, "s": 0.5, "alpha": 0.25}


def test_parse_params_last_value_wins():
    assert parse_params(["s=0.1", "s=0.2"]) == {"s": 0.2}


@pytest.mark.parametrize("expression", ["lambda", "lambda=abc", "=0.3", "s=inf"])
def test_parse_params_rejects_malformed(expression):
    with pytest.raises(ExceptionInvalidData):
        parse_params([expression])


def test_parse_grid_ranges_and_points():
    grid = parse_grid(["s=0.1:0.9:5", "l=0.5"])
    assert grid["s"] == pytest.approx([0.1, 0.3, 0.5, 0.7, 0.9])
    assert grid["lambda"] == [0.5]


@pytest.mark.parametrize("expression", ["s=0.1:0.9:0", "s=0.1:0.9:2.5", "s=0.1:x:3"])
def test_parse_grid_rejects_bad_ranges(expression):
    with pytest.raises(ExceptionInvalidData):
        parse_grid([expression])


def test_parse_grid_empty():
    assert parse_grid([]) == {}


def test_parse_ids():
    assert parse_ids(["whhoi,rocf", "whhoi", " nwomi1 ", ""]) == ["whhoi", "rocf", "nwomi1"]


def test_parse_params_logs_overrides(caplog):
    with caplog.at_level("WARNING", logger="opmean.utils.query_parser"):
        parse_params(["s=0.1", "s=0.2"])
    assert "Overriding parameter s: 0.1 -> 0.2" in caplog.text
