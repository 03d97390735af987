import json

import pytest

from ergodic.systems import InvariantFunction, Observable, make_finite_system


@pytest.fixture
def three_cycle():
    return make_finite_system([1, 2, 0], ["1/3"])


@pytest.fixture
def f3():
    return Observable.table([3, -1, -1])


@pytest.fixture
def zero_lambda(three_cycle):
    return InvariantFunction.uniform(0, three_cycle)


@pytest.fixture
def two_cycle():
    return make_finite_system([1, 0], ["1/2"])


@pytest.fixture
def mixed_system():
    """A fixed point (f = -2) next to the 3-cycle (3, -1, -1)."""
    system = make_finite_system([0, 2, 3, 1], ["1/4", "1/4"])
    return system, Observable.table([-2, 3, -1, -1])


@pytest.fixture
def system_file(tmp_path):
    path = tmp_path / "three_cycle.json"
    path.write_text(
        json.dumps(
            {
                "type": "finite",
                "map": [1, 2, 0],
                "cycle_weights": ["1/3"],
                "f": ["3", "-1", "-1"],
                "lambda": ["0"],
            }
        )
    )
    return path


@pytest.fixture
def serial(monkeypatch):
    monkeypatch.setenv("ERGO_THREADS", "1")
