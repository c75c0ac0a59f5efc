import logging
from functools import lru_cache
from typing import List, Optional

import numpy as np

from opmean.utils.exceptions import ExceptionFunctionNotFound, ExceptionInvalidData
from opmean.v1._shared.schemas import Convexity, TestFunction

logger = logging.getLogger(__name__)

POSITIVE = (0.0, np.inf)
REAL_LINE = (-np.inf, np.inf)

DEFAULT_PALETTE = ["inv", "square", "pow_0.5", "pow_1.5", "xlogx", "log"]


def _inv() -> TestFunction:
    return TestFunction(
        id="inv",
        domain=POSITIVE,
        value=lambda x: 1.0 / x,
        derivative=lambda x: -1.0 / (x * x),
        convexity=Convexity.CONVEX,
    )


def _square() -> TestFunction:
    return TestFunction(
        id="square",
        domain=REAL_LINE,
        value=lambda x: x * x,
        derivative=lambda x: 2.0 * x,
        convexity=Convexity.CONVEX,
    )


def _xlogx() -> TestFunction:
    return TestFunction(
        id="xlogx",
        domain=POSITIVE,
        value=lambda x: x * np.log(x),
        derivative=lambda x: np.log(x) + 1.0,
        convexity=Convexity.CONVEX,
    )


def _log() -> TestFunction:
    return TestFunction(
        id="log",
        domain=POSITIVE,
        value=np.log,
        derivative=lambda x: 1.0 / x,
        convexity=Convexity.CONCAVE,
    )


def power(exponent: float) -> TestFunction:
    """x^s on (0, inf): operator convex for s in [1,2], operator concave for s in [0,1)."""
    if not 0.0 <= exponent <= 2.0:
        raise ExceptionInvalidData(f"pow_s is operator convex/concave only for s in [0,2], got {exponent}")
    convexity = Convexity.CONVEX if exponent >= 1.0 else Convexity.CONCAVE
    return TestFunction(
        id=f"pow_{exponent:g}",
        domain=POSITIVE,
        value=lambda x: np.power(x, exponent),
        derivative=lambda x: exponent * np.power(x, exponent - 1.0),
        convexity=convexity,
    )


_FIXED = {
    "inv": _inv,
    "square": _square,
    "xlogx": _xlogx,
    "log": _log,
}


@lru_cache(maxsize=None)
def get_function(function_id: str) -> TestFunction:
    """Resolve a palette id such as "inv" or "pow_0.5"."""
    if function_id in _FIXED:
        return _FIXED[function_id]()
    if function_id.startswith("pow_"):
        try:
            exponent = float(function_id[len("pow_"):])
        except ValueError:
            raise ExceptionFunctionNotFound(function_id)
        return power(exponent)
    raise ExceptionFunctionNotFound(function_id)


def palette(convexity: Optional[Convexity] = None) -> List[TestFunction]:
    members = [get_function(function_id) for function_id in DEFAULT_PALETTE]
    if convexity is None:
        return members
    return [member for member in members if member.convexity == convexity]
