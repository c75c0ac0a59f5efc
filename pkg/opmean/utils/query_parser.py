import re
import logging
from typing import Dict, Iterable, List

import numpy as np

from opmean.utils.exceptions import exception_invalid_query

logger = logging.getLogger(__name__)

PARAM_PATTERN = re.compile(r"\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.+?)\s*")
GRID_PATTERN = re.compile(r"([^:]+):([^:]+):([^:]+)")

# nomes curtos aceitos na linha de comando
ALIASES = {"lam": "lambda", "l": "lambda", "a": "alpha"}


def _parse_number(text: str, expression: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise exception_invalid_query(f"{expression} ({text!r} is not a number)")
    if not np.isfinite(value):
        raise exception_invalid_query(f"{expression} (non-finite value)")
    return value


def _split(expression: str):
    match = PARAM_PATTERN.fullmatch(expression)
    if not match:
        raise exception_invalid_query(f"{expression} (expected key=value)")
    key = ALIASES.get(match.group(1), match.group(1))
    return key, match.group(2)


def parse_params(expressions: Iterable[str]) -> Dict[str, float]:
    """Parses `k=v` expressions; commas separate several in one argument."""
    params: Dict[str, float] = {}
    for argument in expressions:
        for expression in filter(None, (part.strip() for part in argument.split(","))):
            key, raw = _split(expression)
            if key in params:
                logger.warning(f"Overriding parameter {key}: {params[key]} -> {raw}")
            params[key] = _parse_number(raw, expression)
            logger.debug(f"Parsed param: {key}={params[key]}")
    return params


def parse_grid(expressions: Iterable[str]) -> Dict[str, List[float]]:
    """
    Parses grid expressions `k=v1:v2:n` (n evenly spaced points, endpoints included)
    or `k=v` (a single point).
    """
    grid: Dict[str, List[float]] = {}
    for expression in expressions:
        key, raw = _split(expression)
        match = GRID_PATTERN.fullmatch(raw)
        if match is None:
            grid[key] = [_parse_number(raw, expression)]
            continue
        start = _parse_number(match.group(1), expression)
        stop = _parse_number(match.group(2), expression)
        count = _parse_number(match.group(3), expression)
        if count < 1 or int(count) != count:
            raise exception_invalid_query(f"{expression} (point count must be a positive integer)")
        grid[key] = [float(v) for v in np.linspace(start, stop, int(count))]
        logger.debug(f"Parsed grid: {key} -> {len(grid[key])} points")

    if grid:
        logger.info(f"Parsed grid: { {key: len(values) for key, values in grid.items()} }")
    return grid


def parse_ids(arguments: Iterable[str]) -> List[str]:
    """`a,b` and repeated flags both give ["a", "b"]; order kept, duplicates dropped."""
    ids: List[str] = []
    for argument in arguments:
        for item in (part.strip() for part in argument.split(",")):
            if item and item not in ids:
                ids.append(item)
    return ids
