from typing import List, Tuple

import pytest

from opmean.v1._shared.schemas import HermitianMatrix, QuadratureSpec
from opmean.v1.hermat.service import random_hpd_pair

DIMS = [2, 3, 4, 6]

Pair = Tuple[HermitianMatrix, HermitianMatrix]


def _pairs(count: int, seed: int, cond_cap: float = 10.0) -> List[Pair]:
    return [random_hpd_pair(DIMS[k % len(DIMS)], cond_cap, seed + k) for k in range(count)]


@pytest.fixture
def example_pair() -> Pair:
    """A = diag(1,2), B = diag(2,1)."""
    return HermitianMatrix.diag([1.0, 2.0]), HermitianMatrix.diag([2.0, 1.0])


@pytest.fixture
def spec() -> QuadratureSpec:
    return QuadratureSpec()


@pytest.fixture
def random_pairs() -> List[Pair]:
    return _pairs(6, seed=2024)


@pytest.fixture
def many_pairs() -> List[Pair]:
    return _pairs(50, seed=77)


@pytest.fixture
def random_pair() -> Pair:
    return random_hpd_pair(3, 10.0, 11)


@pytest.fixture
def complex_pair() -> Pair:
    return random_hpd_pair(3, 10.0, 12, complex_entries=True)
