import math
from pathlib import Path

import numpy as np
import pytest

from hardlabel import ImageTensor, load_mlp, read_image

FIXTURES = Path(__file__).parent / "fixtures"


class CountingOracle:
    """Instrumentation wrapper independent of the package's own accounting."""

    def __init__(self, inner):
        self.inner = inner
        self.count = 0

    def classify(self, image):
        self.count += 1
        return self.inner.classify(image)


def assert_attack_contracts(result, counting: CountingOracle, q_max: int) -> None:
    """Budget exactness and best-so-far monotonicity, shared by all attack tests."""
    assert result.queries_used == counting.count
    assert result.queries_used <= q_max
    assert len(result.trace) == result.queries_used
    bests = [b for _, b in result.trace]
    for earlier, later in zip(bests, bests[1:]):
        assert later <= earlier or (math.isinf(earlier) and math.isinf(later))
    indices = [q for q, _ in result.trace]
    assert indices == list(range(1, len(indices) + 1))


def first_query_reaching(result, tol: float):
    for q, best in result.trace:
        if best <= tol:
            return q
    return None


@pytest.fixture(scope="session")
def fixture_oracle():
    return load_mlp(FIXTURES / "mlp_stripes_8x8.json")


@pytest.fixture(scope="session")
def fixture_source():
    return read_image(FIXTURES / "source.pgm", range_hint=1.0)


@pytest.fixture(scope="session")
def fixture_reference():
    return read_image(FIXTURES / "reference.pgm", range_hint=1.0)


def tensor(values, range_l: float = 1.0) -> ImageTensor:
    """1-row image from a flat list; the workhorse of the analytic tests."""
    arr = np.asarray(values, dtype=np.float64).reshape(1, -1, 1)
    return ImageTensor(arr, range_l)
