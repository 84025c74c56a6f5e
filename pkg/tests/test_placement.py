import pytest
from hypothesis import given
from hypothesis import strategies as st

from ecstore.errors import ConfigError, NoAlternativeError
from ecstore.placement import retry_target, round_robin


def test_figure_layout_ten_chunks_three_endpoints():
    plan = round_robin(10, ["A", "B", "C"])
    assert plan.by_endpoint() == {"A": [0, 3, 6, 9], "B": [1, 4, 7], "C": [2, 5, 8]}
    assert plan.counts() == [4, 3, 3]
    assert plan.endpoint_for(9) == "A"


def test_one_per_endpoint():
    ids = [f"se{i}" for i in range(15)]
    plan = round_robin(15, ids)
    assert plan.counts() == [1] * 15


def test_divisible_case_is_even():
    assert round_robin(12, ["a", "b", "c"]).counts() == [4, 4, 4]


def test_fewer_chunks_than_endpoints():
    assert round_robin(2, ["a", "b", "c"]).counts() == [1, 1, 0]


@pytest.mark.parametrize("endpoints", [[], ["a", "a"]])
def test_bad_vectors(endpoints):
    with pytest.raises(ConfigError):
        round_robin(3, endpoints)


def test_bad_chunk_count():
    with pytest.raises(ConfigError):
        round_robin(0, ["a"])


@given(st.integers(1, 60), st.integers(1, 20))
def test_balance_and_coverage(m, s):
    ids = [f"e{i}" for i in range(s)]
    plan = round_robin(m, ids)
    assert [i for i, _ in plan.assignments] == list(range(m))
    assert all(e == ids[i % s] for i, e in plan.assignments)
    counts = plan.counts()
    assert set(counts) <= {m // s, -(-m // s)}
    assert counts == sorted(counts, reverse=True)
    assert round_robin(m, ids) == plan


def test_retry_wraps():
    assert retry_target((5, "c"), ["a", "b", "c"], 1) == "a"


def test_retry_exhaustion_order():
    vector = ["a", "b", "c", "d"]
    assert [retry_target((0, "a"), vector, n) for n in (1, 2, 3)] == ["b", "c", "d"]
    assert retry_target((0, "a"), vector, 4) == "a"


def test_retry_single_endpoint():
    with pytest.raises(NoAlternativeError):
        retry_target((0, "a"), ["a"], 1)


def test_retry_bad_args():
    with pytest.raises(ValueError):
        retry_target((0, "a"), ["a", "b"], 0)
    with pytest.raises(ConfigError):
        retry_target((0, "z"), ["a", "b"], 1)
